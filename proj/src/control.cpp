#include "nlvg/control.hpp"

#include "nlvg/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nlvg::control {

void NlvgSchedule::validate() const {
    if (!(k1 >= 0.0) || !(amplitude >= 0.0) || !(delta1 >= 0.0) || !(delta1 < delta2) ||
        !std::isfinite(k1) || !std::isfinite(amplitude) || !std::isfinite(delta2)) {
        throw Error(ErrorCode::InvalidArgument,
                    "NLVG schedule needs k1 >= 0, A >= 0 and 0 <= delta1 < delta2");
    }
}

double nlvg_gain(double s, const NlvgSchedule& sched) {
    if (std::isnan(s) || s < 0.0) {
        throw Error(ErrorCode::NegativeSignal, "scheduling signal must be >= 0");
    }
    if (s < sched.delta1) {
        return sched.k1;
    }
    if (s > sched.delta2) {
        return sched.k1 + 2.0 * sched.amplitude;
    }
    const double phase = std::numbers::pi * (s - sched.delta1) / (sched.delta2 - sched.delta1);
    return sched.k1 + sched.amplitude * (1.0 - std::cos(phase));
}

ChannelGains ChannelGains::fixed(double kp, double ki, double kd) {
    ChannelGains g;
    g.mode = GainMode::Fixed;
    g.kp = kp;
    g.ki = ki;
    g.kd = kd;
    return g;
}

ChannelGains ChannelGains::nlvg(const NlvgSchedule& p, const NlvgSchedule& i, const NlvgSchedule& d) {
    ChannelGains g;
    g.mode = GainMode::Nlvg;
    g.sched_p = p;
    g.sched_i = i;
    g.sched_d = d;
    g.kp = p.k1;
    g.ki = i.k1;
    g.kd = d.k1;
    return g;
}

void ChannelGains::validate() const {
    if (mode == GainMode::Fixed) {
        if (!(kp >= 0.0) || !(ki >= 0.0) || !(kd >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "PID gains must be >= 0");
        }
        return;
    }
    sched_p.validate();
    sched_i.validate();
    sched_d.validate();
}

PidTerms pid_step(const PidChannelState& state, double error, double dt, const ChannelGains& gains,
                  const PidOptions& options) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw Error(ErrorCode::InvalidArgument, "pid_step requires dt > 0");
    }
    if (!std::isfinite(error)) {
        throw Error(ErrorCode::NonFinite, "pid_step received a non-finite error");
    }

    PidTerms out;
    out.state = state;
    const double increment =
        state.prev_valid ? 0.5 * (error + state.prev_error) * dt : error * dt;
    out.state.integral =
        std::clamp(state.integral + increment, -options.integral_limit, options.integral_limit);
    out.derivative = state.prev_valid ? (error - state.prev_error) / dt : 0.0;
    out.state.prev_error = error;
    out.state.prev_valid = true;

    if (gains.mode == GainMode::Fixed) {
        out.kp = gains.kp;
        out.ki = gains.ki;
        out.kd = gains.kd;
    } else {
        const double abs_e = std::abs(error);
        const double abs_int = std::abs(out.state.integral);
        const double abs_der = std::abs(out.derivative);
        out.kp = nlvg_gain(abs_e, gains.sched_p);
        if (options.signals == ScheduleSignals::Crossed) {
            out.ki = nlvg_gain(abs_der, gains.sched_i);
            out.kd = nlvg_gain(abs_int, gains.sched_d);
        } else {
            out.ki = nlvg_gain(abs_int, gains.sched_i);
            out.kd = nlvg_gain(abs_der, gains.sched_d);
        }
    }
    out.command = out.kp * error + out.ki * out.state.integral + out.kd * out.derivative;
    return out;
}

AttitudeSetpoint outer_to_attitude(double ux, double uy, double psi, double gravity, double limit) {
    const double c = std::cos(psi);
    const double s = std::sin(psi);
    AttitudeSetpoint sp;
    sp.phi = std::clamp((ux * s - uy * c) / gravity, -limit, limit);
    sp.theta = std::clamp((ux * c + uy * s) / gravity, -limit, limit);
    return sp;
}

CascadeConfig CascadeConfig::baseline_gains() {
    CascadeConfig cfg;
    for (auto ch : {kX, kY, kZ}) {
        cfg.gains[ch] = ChannelGains::fixed(5.0, 0.2, 5.0);
    }
    for (auto ch : {kPhi, kTheta, kPsi}) {
        cfg.gains[ch] = ChannelGains::fixed(8.0, 0.1, 5.0);
    }
    return cfg;
}

void CascadeConfig::validate() const {
    for (const auto& g : gains) {
        g.validate();
    }
    if (!(options.integral_limit > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "integral limit must be > 0");
    }
    if (!(attitude_limit > 0.0) || !(attitude_limit < dynamics::kGimbalGuardRad)) {
        throw Error(ErrorCode::InvalidArgument, "attitude limit must lie in (0, 85 deg)");
    }
}

CascadeOutput cascade_update(const dynamics::StateVector& state, const trajectory::ReferenceSample& ref,
                             const CascadeConfig& config, const dynamics::QuadParams& params,
                             const CascadeState& channels, double dt) {
    if (!ref.finite()) {
        throw Error(ErrorCode::NonFinite, "reference sample contains a non-finite value");
    }
    if (std::abs(state.theta) >= dynamics::kGimbalGuardRad) {
        throw Error(ErrorCode::GimbalLock, "|theta| reached the 85 deg guard");
    }

    CascadeOutput out;
    out.channels = channels;
    auto run = [&](Channel ch, double error) {
        out.errors[ch] = error;
        const PidTerms t = pid_step(channels[ch], error, dt, config.gains[ch], config.options);
        out.channels[ch] = t.state;
        return t.command;
    };

    auto& u = out.input;
    if (ref.attitude_override) {
        out.attitude_setpoint = {ref.phi_d, ref.theta_d};
        out.errors[kX] = ref.x - state.x;
        out.errors[kY] = ref.y - state.y;
    } else {
        u.ux = ref.ax + run(kX, ref.x - state.x);
        u.uy = ref.ay + run(kY, ref.y - state.y);
        out.attitude_setpoint =
            outer_to_attitude(u.ux, u.uy, state.psi, params.gravity, config.attitude_limit);
    }

    const double tilt = std::cos(state.phi) * std::cos(state.theta);
    u.thrust = params.mass * params.gravity / tilt + run(kZ, ref.z - state.z);

    u.tau_x = run(kPhi, out.attitude_setpoint.phi - state.phi);
    u.tau_y = run(kTheta, out.attitude_setpoint.theta - state.theta);
    u.tau_z = run(kPsi, ref.psi_d - state.psi);

    u = dynamics::saturate(u, params);
    return out;
}

PidChannelState reset(const PidChannelState&) { return PidChannelState{}; }

CascadeState reset(const CascadeState&) { return CascadeState{}; }

} // namespace nlvg::control
