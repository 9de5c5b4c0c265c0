#pragma once

#include <stdexcept>
#include <string>

namespace snakewalk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

#define SNAKEWALK_DEFINE_ERROR(Name, Kind)                      \
    class Name : public Error {                                 \
    public:                                                     \
        using Error::Error;                                     \
        const char* kind() const noexcept override { return Kind; } \
    };

// A caller violated a documented precondition.
SNAKEWALK_DEFINE_ERROR(PreconditionError, "precondition")
// An enumeration or matrix would exceed the configured size limit.
SNAKEWALK_DEFINE_ERROR(CapacityError, "capacity")
// Amplitude leaked past the edge of a finite position window.
SNAKEWALK_DEFINE_ERROR(TruncationError, "truncation")
// A momentum grid is too coarse for the requested oscillation.
SNAKEWALK_DEFINE_ERROR(ResolutionError, "resolution")
// The secular-equation scan did not find the expected number of roots.
SNAKEWALK_DEFINE_ERROR(RootCountError, "root_count")
// Two independent derivative routes disagree.
SNAKEWALK_DEFINE_ERROR(NumericalInstabilityError, "numerical_instability")
// An iterative method did not reach its tolerance.
SNAKEWALK_DEFINE_ERROR(ConvergenceError, "convergence")
// An extracted path is rejected by the black-box oracle.
SNAKEWALK_DEFINE_ERROR(OracleValidationError, "oracle_validation")
// Broken internal invariant; indicates a bug rather than bad input.
SNAKEWALK_DEFINE_ERROR(InternalError, "internal")
// Malformed input file.
SNAKEWALK_DEFINE_ERROR(ParseError, "parse")

#undef SNAKEWALK_DEFINE_ERROR

namespace detail {

template <class E = PreconditionError>
inline void require(bool condition, const std::string& message) {
    if (!condition) throw E(message);
}

}  // namespace detail
}  // namespace snakewalk
