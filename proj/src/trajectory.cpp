#include "nlvg/trajectory.hpp"

#include "nlvg/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace nlvg::trajectory {

bool ReferenceSample::finite() const {
    for (double v : {t, x, y, z, vx, vy, vz, ax, ay, az, psi_d, phi_d, theta_d}) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

std::string_view to_string(StepChannel channel) {
    switch (channel) {
    case StepChannel::X: return "x";
    case StepChannel::Y: return "y";
    case StepChannel::Z: return "z";
    case StepChannel::Phi: return "phi";
    case StepChannel::Theta: return "theta";
    case StepChannel::Psi: return "psi";
    case StepChannel::Attitude: return "attitude";
    }
    return "?";
}

StepChannel step_channel_from_string(std::string_view name) {
    for (auto ch : {StepChannel::X, StepChannel::Y, StepChannel::Z, StepChannel::Phi,
                    StepChannel::Theta, StepChannel::Psi, StepChannel::Attitude}) {
        if (to_string(ch) == name) {
            return ch;
        }
    }
    throw Error(ErrorCode::ConfigError, "unknown step channel '" + std::string(name) + "'");
}

std::string_view to_string(YawMode mode) { return mode == YawMode::Zero ? "zero" : "tangent"; }

YawMode yaw_mode_from_string(std::string_view name) {
    if (name == "zero") {
        return YawMode::Zero;
    }
    if (name == "tangent") {
        return YawMode::Tangent;
    }
    throw Error(ErrorCode::ConfigError, "unknown yaw policy '" + std::string(name) + "'");
}

namespace {

struct ShapeValidator {
    void operator()(const StepSpec& s) const {
        if (!std::isfinite(s.amplitude) || !(s.t_start >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "step needs finite amplitude and t_start >= 0");
        }
    }
    void operator()(const StormSpec& s) const {
        if (!(s.omega > 0.0) || !(s.t_takeoff >= 0.0) || !(s.ramp_time >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "storm needs omega > 0, t_takeoff >= 0, ramp >= 0");
        }
    }
    void operator()(const LissajousSpec& s) const {
        if (!(s.omega > 0.0) || !(s.ramp_time >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "lissajous needs omega > 0 and ramp_time >= 0");
        }
    }
};

} // namespace

void TrajectorySpec::validate() const {
    if (!(duration > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "trajectory duration must be > 0");
    }
    std::visit(ShapeValidator{}, shape);
}

ReferenceSample step_reference(const StepSpec& spec, double t) {
    ReferenceSample r;
    r.t = t;
    r.attitude_override = spec.channel == StepChannel::Phi || spec.channel == StepChannel::Theta ||
                          spec.channel == StepChannel::Attitude;
    if (t < spec.t_start) {
        return r;
    }
    switch (spec.channel) {
    case StepChannel::X: r.x = spec.amplitude; break;
    case StepChannel::Y: r.y = spec.amplitude; break;
    case StepChannel::Z: r.z = spec.amplitude; break;
    case StepChannel::Phi: r.phi_d = spec.amplitude; break;
    case StepChannel::Theta: r.theta_d = spec.amplitude; break;
    case StepChannel::Psi: r.psi_d = spec.amplitude; break;
    case StepChannel::Attitude:
        r.phi_d = spec.amplitude;
        r.theta_d = spec.amplitude;
        break;
    }
    return r;
}

ReferenceSample storm_reference(const StormSpec& spec, double t) {
    ReferenceSample r;
    r.t = t;
    if (t < spec.t_takeoff) {
        return r;
    }
    const double since_takeoff = t - spec.t_takeoff;
    if (since_takeoff < spec.ramp_time) {
        // Straight climb from the origin to the first spiral point.
        const double vx = spec.r0 / spec.ramp_time;
        const double vz = spec.z0 / spec.ramp_time;
        r.x = vx * since_takeoff;
        r.z = vz * since_takeoff;
        r.vx = vx;
        r.vz = vz;
        return r;
    }

    const double tau = since_takeoff - spec.ramp_time;
    const double w = spec.omega;
    const double c = spec.radial_rate;
    const double radius = spec.r0 + c * tau;
    const double cs = std::cos(w * tau);
    const double sn = std::sin(w * tau);
    r.x = radius * cs;
    r.y = radius * sn;
    r.z = spec.z0 + spec.climb_rate * tau;
    r.vx = c * cs - radius * w * sn;
    r.vy = c * sn + radius * w * cs;
    r.vz = spec.climb_rate;
    r.ax = -2.0 * c * w * sn - radius * w * w * cs;
    r.ay = 2.0 * c * w * cs - radius * w * w * sn;
    return r;
}

ReferenceSample lissajous_reference(const LissajousSpec& spec, double t) {
    ReferenceSample r;
    r.t = t;
    const double wx = spec.a * spec.omega;
    const double wy = spec.b * spec.omega;
    const double wz = spec.c * spec.omega;
    const double px = wx * t;
    const double py = wy * t + spec.phase;
    const double pz = wz * t;
    r.x = spec.ax * std::sin(px);
    r.y = spec.ay * std::sin(py);
    r.z = spec.z0 + spec.az * std::sin(pz);
    r.vx = spec.ax * wx * std::cos(px);
    r.vy = spec.ay * wy * std::cos(py);
    r.vz = spec.az * wz * std::cos(pz);
    r.ax = -spec.ax * wx * wx * std::sin(px);
    r.ay = -spec.ay * wy * wy * std::sin(py);
    r.az = -spec.az * wz * wz * std::sin(pz);
    if (t < spec.ramp_time) {
        const double s = t / spec.ramp_time;
        const double ds = 1.0 / spec.ramp_time;
        r.az = 2.0 * ds * r.vz + s * r.az;
        r.vz = ds * r.z + s * r.vz;
        r.z = s * r.z;
    }
    return r;
}

ReferenceSample sample_reference(const TrajectorySpec& spec, double t) {
    if (!(t >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "reference time must be >= 0");
    }
    return std::visit(
        [t](const auto& shape) -> ReferenceSample {
            using T = std::decay_t<decltype(shape)>;
            if constexpr (std::is_same_v<T, StepSpec>) {
                return step_reference(shape, t);
            } else if constexpr (std::is_same_v<T, StormSpec>) {
                return storm_reference(shape, t);
            } else {
                return lissajous_reference(shape, t);
            }
        },
        spec.shape);
}

double yaw_policy(YawMode mode, double vx, double vy, double previous) {
    if (mode == YawMode::Zero) {
        return 0.0;
    }
    if (std::hypot(vx, vy) < 1e-9) {
        return previous;
    }
    const double raw = std::atan2(vy, vx);
    // Pick the branch raw + 2k*pi closest to the previous heading.
    const double two_pi = 2.0 * std::numbers::pi;
    return raw + two_pi * std::round((previous - raw) / two_pi);
}

double YawTracker::update(double vx, double vy) {
    previous_ = yaw_policy(mode_, vx, vy, previous_);
    return previous_;
}

} // namespace nlvg::trajectory
