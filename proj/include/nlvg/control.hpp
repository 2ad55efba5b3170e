#pragma once

#include "nlvg/dynamics.hpp"
#include "nlvg/trajectory.hpp"

#include <array>
#include <string_view>

namespace nlvg::control {

/**
 * Nonlinear variable-gain schedule for one PID gain.
 *
 * The gain sits at k1 while the scheduling signal is below delta1, rises
 * along a half-cosine between delta1 and delta2 and saturates at k1 + 2A.
 */
struct NlvgSchedule {
    double k1{};
    double amplitude{};
    double delta1{0.01};
    double delta2{0.838};

    double upper() const { return k1 + 2.0 * amplitude; }
    void validate() const;

    bool operator==(const NlvgSchedule&) const = default;
};

/// Throws NegativeSignal for s < 0.
double nlvg_gain(double s, const NlvgSchedule& sched);

enum class GainMode { Fixed, Nlvg };

/// Which signal drives which gain schedule in Nlvg mode.
///   Crossed: kp <- |e|, ki <- |de/dt|, kd <- |int e|
///   Matched: kp <- |e|, ki <- |int e|, kd <- |de/dt|
enum class ScheduleSignals { Crossed, Matched };

struct ChannelGains {
    GainMode mode{GainMode::Fixed};
    double kp{}, ki{}, kd{};
    NlvgSchedule sched_p{}, sched_i{}, sched_d{};

    static ChannelGains fixed(double kp, double ki, double kd);
    static ChannelGains nlvg(const NlvgSchedule& p, const NlvgSchedule& i, const NlvgSchedule& d);

    void validate() const;
};

struct PidChannelState {
    double integral{};
    double prev_error{};
    bool prev_valid{false};

    bool operator==(const PidChannelState&) const = default;
};

struct PidOptions {
    double integral_limit{10.0};
    ScheduleSignals signals{ScheduleSignals::Crossed};
};

struct PidTerms {
    double command{};
    double kp{}, ki{}, kd{};
    double derivative{};
    PidChannelState state{};
};

/// One controller tick: trapezoidal integral with clamp anti-windup and a
/// backward-difference derivative that is zero on the first call after reset.
PidTerms pid_step(const PidChannelState& state, double error, double dt, const ChannelGains& gains,
                  const PidOptions& options = {});

struct AttitudeSetpoint {
    double phi{};
    double theta{};
};

/// Small-angle inversion of planar acceleration requests, clamped to +/-limit.
AttitudeSetpoint outer_to_attitude(double ux, double uy, double psi, double gravity, double limit);

enum Channel : std::size_t { kX = 0, kY, kZ, kPhi, kTheta, kPsi, kChannelCount };

inline constexpr std::array<std::string_view, kChannelCount> kChannelNames = {"x",   "y",     "z",
                                                                             "phi", "theta", "psi"};

struct CascadeConfig {
    std::array<ChannelGains, kChannelCount> gains{};
    PidOptions options{};
    /// Desired roll/pitch clamp (rad); must stay below the gimbal guard.
    double attitude_limit{0.5};

    static CascadeConfig baseline_gains();
    void validate() const;
};

using CascadeState = std::array<PidChannelState, kChannelCount>;

struct CascadeOutput {
    dynamics::ControlInput input{};
    CascadeState channels{};
    AttitudeSetpoint attitude_setpoint{};
    std::array<double, kChannelCount> errors{};
};

CascadeOutput cascade_update(const dynamics::StateVector& state, const trajectory::ReferenceSample& ref,
                             const CascadeConfig& config, const dynamics::QuadParams& params,
                             const CascadeState& channels, double dt);

CascadeState reset(const CascadeState& channels);
PidChannelState reset(const PidChannelState& channel);

} // namespace nlvg::control
