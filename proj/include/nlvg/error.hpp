#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlvg {

enum class ErrorCode {
    InvalidArgument,
    NonFinite,
    GimbalLock,
    NegativeSignal,
    EpisodeDiverged,
    WindowTooLong,
    MismatchedChannels,
    NoVerticalRoom,
    PlanInfeasible,
    ConfigError,
    ConfigMismatch,
    SimulationDiverged,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::GimbalLock: return "GimbalLock";
    case ErrorCode::NegativeSignal: return "NegativeSignal";
    case ErrorCode::EpisodeDiverged: return "EpisodeDiverged";
    case ErrorCode::WindowTooLong: return "WindowTooLong";
    case ErrorCode::MismatchedChannels: return "MismatchedChannels";
    case ErrorCode::NoVerticalRoom: return "NoVerticalRoom";
    case ErrorCode::PlanInfeasible: return "PlanInfeasible";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::SimulationDiverged: return "SimulationDiverged";
    }
    return "Unknown";
}

} // namespace nlvg
