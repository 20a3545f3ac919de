#pragma once

#include <stdexcept>
#include <string>

namespace immunize {

enum class ErrorKind {
    Domain,          // argument outside the mathematical domain (e.g. yield <= -1)
    Validation,      // a type invariant does not hold
    Extrapolation,   // evaluation outside a knot range or hedge span
    Fit,             // polynomial fit cannot be formed or is ill-conditioned
    DegenerateSpan,  // maturities or span endpoints closer than the tolerance
    Singular,        // hedge system has no unique solution
    Contract,        // operation called in a mode it does not support
    NotFound,        // unknown instrument or bond id
    Data,            // malformed input file
    Io               // filesystem failure
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace immunize
