#include "bll/errors.hpp"

namespace bll {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Stability: return "stability";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Compatibility: return "compatibility";
    case ErrorKind::DegenerateClosure: return "degenerate-closure";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Cfl: return "cfl";
    case ErrorKind::Alignment: return "alignment";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

} // namespace bll
