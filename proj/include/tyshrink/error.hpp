#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tyshrink {

enum class ErrorCode {
    InvalidParameter,
    DimensionMismatch,
    NotPositiveDefinite,
    ConvergenceFailure,
    ZeroSample,
    NotTraceNormalized,
    NotEnoughSamples,
    DegenerateData,
    DegenerateLabels,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidParameter: return "InvalidParameter";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorCode::ZeroSample: return "ZeroSample";
        case ErrorCode::NotTraceNormalized: return "NotTraceNormalized";
        case ErrorCode::NotEnoughSamples: return "NotEnoughSamples";
        case ErrorCode::DegenerateData: return "DegenerateData";
        case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace tyshrink
