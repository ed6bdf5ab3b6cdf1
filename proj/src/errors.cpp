#include "mrw/errors.hpp"

namespace mrw {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidScale: return "invalid-scale";
        case ErrorKind::DegenerateSeries: return "degenerate-series";
        case ErrorKind::InsufficientData: return "insufficient-data";
        case ErrorKind::Alignment: return "alignment";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::InvalidParams: return "invalid-params";
        case ErrorKind::CouplingUndefined: return "coupling-undefined";
        case ErrorKind::GeneratorConfig: return "generator-config";
        case ErrorKind::InvalidWindow: return "invalid-window";
        case ErrorKind::InvalidSeries: return "invalid-series";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::DuplicateMonth: return "duplicate-month";
        case ErrorKind::EmptyFile: return "empty-file";
        case ErrorKind::EmptyIntersection: return "empty-intersection";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

}  // namespace mrw
