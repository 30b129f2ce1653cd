#include "mlab/error.hpp"

namespace mlab {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::precondition: return "precondition";
        case ErrorKind::resource_limit: return "resource_limit";
        case ErrorKind::infeasible_budget: return "infeasible_budget";
        case ErrorKind::pole: return "pole";
        case ErrorKind::range: return "range";
        case ErrorKind::capability: return "capability";
        case ErrorKind::domain: return "domain";
        case ErrorKind::contour: return "contour";
        case ErrorKind::dominance: return "dominance";
        case ErrorKind::resolution: return "resolution";
        case ErrorKind::geometry: return "geometry";
        case ErrorKind::degree_limit: return "degree_limit";
        case ErrorKind::approximation_failure: return "approximation_failure";
        case ErrorKind::source_count_limit: return "source_count_limit";
        case ErrorKind::precision: return "precision";
        case ErrorKind::parse: return "parse";
        case ErrorKind::validation: return "validation";
    }
    return "unknown";
}

}  // namespace mlab
