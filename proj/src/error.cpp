#include "immunize/error.hpp"

namespace immunize {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Validation: return "validation";
        case ErrorKind::Extrapolation: return "extrapolation";
        case ErrorKind::Fit: return "fit";
        case ErrorKind::DegenerateSpan: return "degenerate-span";
        case ErrorKind::Singular: return "singular";
        case ErrorKind::Contract: return "contract";
        case ErrorKind::NotFound: return "not-found";
        case ErrorKind::Data: return "data";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

}  // namespace immunize
