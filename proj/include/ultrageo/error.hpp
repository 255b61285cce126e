#pragma once

#include <stdexcept>
#include <string>

namespace ultrageo {

/// Base of every error raised by the library. `code()` is the stable
/// machine-readable tag the CLI prints as `error=<code>`.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

    /// Malformed input (exit status 2) vs. violated mathematical constraint (1).
    virtual bool is_input_error() const noexcept { return false; }

private:
    std::string code_;
};

#define ULTRAGEO_DEFINE_ERROR(Name, tag, input)                                  \
    class Name : public Error {                                                  \
    public:                                                                      \
        explicit Name(const std::string& what) : Error(tag, what) {}            \
        bool is_input_error() const noexcept override { return input; }          \
    };

ULTRAGEO_DEFINE_ERROR(ParseError, "ParseError", true)
ULTRAGEO_DEFINE_ERROR(InvalidField, "InvalidField", true)
ULTRAGEO_DEFINE_ERROR(ShapeMismatch, "ShapeMismatch", true)
ULTRAGEO_DEFINE_ERROR(OutOfRange, "OutOfRange", true)
ULTRAGEO_DEFINE_ERROR(DivisionByZero, "DivisionByZero", false)
ULTRAGEO_DEFINE_ERROR(SingularMatrix, "SingularMatrix", false)
ULTRAGEO_DEFINE_ERROR(ParityError, "ParityError", false)
ULTRAGEO_DEFINE_ERROR(NotSpecialLinear, "NotSpecialLinear", false)
ULTRAGEO_DEFINE_ERROR(NotInGroup, "NotInGroup", false)
ULTRAGEO_DEFINE_ERROR(ImpossibleCase, "ImpossibleCase", false)
ULTRAGEO_DEFINE_ERROR(NotAlternating, "NotAlternating", false)
ULTRAGEO_DEFINE_ERROR(WrongSymmetry, "WrongSymmetry", false)
ULTRAGEO_DEFINE_ERROR(SingularSpace, "SingularSpace", false)
ULTRAGEO_DEFINE_ERROR(NotIsometry, "NotIsometry", false)
ULTRAGEO_DEFINE_ERROR(InvariantViolation, "InvariantViolation", false)

#undef ULTRAGEO_DEFINE_ERROR

}  // namespace ultrageo
