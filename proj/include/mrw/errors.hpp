#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mrw {

enum class ErrorKind {
    InvalidScale,
    DegenerateSeries,
    InsufficientData,
    Alignment,
    Domain,
    InvalidParams,
    CouplingUndefined,
    GeneratorConfig,
    InvalidWindow,
    InvalidSeries,
    Parse,
    DuplicateMonth,
    EmptyFile,
    EmptyIntersection,
    Io,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so the CLI can map it
// onto a stable exit code and a machine-readable error record.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace mrw
