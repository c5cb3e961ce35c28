#include "epitrack/error.hpp"

namespace epitrack {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::validation: return "validation";
    case ErrorKind::parse: return "parse";
    case ErrorKind::fetch_transient: return "fetch_transient";
    case ErrorKind::source: return "source";
    }
    return "unknown";
}

} // namespace epitrack
