#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mlab {

/// Machine-readable failure categories. The CLI reports these verbatim.
enum class ErrorKind {
    precondition,
    resource_limit,
    infeasible_budget,
    pole,
    range,
    capability,
    domain,
    contour,
    dominance,
    resolution,
    geometry,
    degree_limit,
    approximation_failure,
    source_count_limit,
    precision,
    parse,
    validation,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace mlab
