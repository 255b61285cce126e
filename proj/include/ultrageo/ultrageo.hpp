#pragma once

#include "error.hpp"
#include "rational.hpp"
#include "random.hpp"
#include "field.hpp"
#include "matrix.hpp"
#include "sampling.hpp"
#include "permutation.hpp"
#include "perm_split.hpp"
#include "linear_split.hpp"
#include "forms.hpp"
#include "classical.hpp"
#include "geodesic.hpp"
#include "verify.hpp"
