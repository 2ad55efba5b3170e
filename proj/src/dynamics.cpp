#include "nlvg/dynamics.hpp"

#include "nlvg/error.hpp"

#include <algorithm>
#include <cmath>

namespace nlvg::dynamics {

std::array<double, StateVector::kSize> StateVector::to_array() const {
    return {phi, theta, psi, phi_dot, theta_dot, psi_dot, x, y, z, x_dot, y_dot, z_dot};
}

StateVector StateVector::from_array(const std::array<double, kSize>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11]};
}

bool StateVector::finite() const {
    const auto values = to_array();
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

StateVector operator+(const StateVector& a, const StateVector& b) {
    auto lhs = a.to_array();
    const auto rhs = b.to_array();
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        lhs[i] += rhs[i];
    }
    return StateVector::from_array(lhs);
}

StateVector operator*(double s, const StateVector& a) {
    auto values = a.to_array();
    for (auto& v : values) {
        v *= s;
    }
    return StateVector::from_array(values);
}

void QuadParams::validate() const {
    const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    const auto nonnegative = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!positive(mass) || !positive(ixx) || !positive(iyy) || !positive(izz)) {
        throw Error(ErrorCode::InvalidArgument, "mass and inertia must be positive");
    }
    if (!positive(gravity) || !positive(thrust_max) || !positive(torque_max)) {
        throw Error(ErrorCode::InvalidArgument, "gravity, thrust_max and torque_max must be positive");
    }
    if (!nonnegative(drag_x) || !nonnegative(drag_y) || !nonnegative(drag_z)) {
        throw Error(ErrorCode::InvalidArgument, "drag coefficients must be non-negative");
    }
}

namespace {

bool finite(const ControlInput& u) {
    return std::isfinite(u.ux) && std::isfinite(u.uy) && std::isfinite(u.thrust) &&
           std::isfinite(u.tau_x) && std::isfinite(u.tau_y) && std::isfinite(u.tau_z);
}

} // namespace

StateRate derivative(const StateVector& s, const ControlInput& u, const QuadParams& p) {
    if (!s.finite() || !finite(u)) {
        throw Error(ErrorCode::NonFinite, "state or input contains a non-finite value");
    }
    if (std::abs(s.theta) >= kGimbalGuardRad) {
        throw Error(ErrorCode::GimbalLock, "|theta| reached the 85 deg guard (theta = " +
                                               std::to_string(s.theta) + " rad)");
    }

    const double cphi = std::cos(s.phi), sphi = std::sin(s.phi);
    const double cth = std::cos(s.theta), sth = std::sin(s.theta);
    const double cpsi = std::cos(s.psi), spsi = std::sin(s.psi);
    const double thrust_acc = u.thrust / p.mass;

    StateRate d;
    d.phi = s.phi_dot;
    d.theta = s.theta_dot;
    d.psi = s.psi_dot;
    d.phi_dot = ((p.iyy - p.izz) * s.theta_dot * s.psi_dot + u.tau_x) / p.ixx;
    d.theta_dot = ((p.izz - p.ixx) * s.phi_dot * s.psi_dot + u.tau_y) / p.iyy;
    d.psi_dot = ((p.ixx - p.iyy) * s.phi_dot * s.theta_dot + u.tau_z) / p.izz;
    d.x = s.x_dot;
    d.y = s.y_dot;
    d.z = s.z_dot;
    d.x_dot = (cphi * sth * cpsi + sphi * spsi) * thrust_acc - p.drag_x * s.x_dot / p.mass;
    d.y_dot = (cphi * sth * spsi - sphi * cpsi) * thrust_acc - p.drag_y * s.y_dot / p.mass;
    d.z_dot = cphi * cth * thrust_acc - p.gravity - p.drag_z * s.z_dot / p.mass;
    return d;
}

StateVector step_rk4(const StateVector& s, const ControlInput& u, const QuadParams& p, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw Error(ErrorCode::InvalidArgument, "step_rk4 requires dt > 0");
    }
    const StateRate k1 = derivative(s, u, p);
    const StateRate k2 = derivative(s + (0.5 * dt) * k1, u, p);
    const StateRate k3 = derivative(s + (0.5 * dt) * k2, u, p);
    const StateRate k4 = derivative(s + dt * k3, u, p);
    return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

ControlInput hover_input(const QuadParams& p) {
    ControlInput u;
    u.thrust = p.mass * p.gravity;
    return u;
}

ControlInput saturate(const ControlInput& u, const QuadParams& p) {
    ControlInput out = u;
    out.thrust = std::clamp(u.thrust, 0.0, p.thrust_max);
    out.tau_x = std::clamp(u.tau_x, -p.torque_max, p.torque_max);
    out.tau_y = std::clamp(u.tau_y, -p.torque_max, p.torque_max);
    out.tau_z = std::clamp(u.tau_z, -p.torque_max, p.torque_max);
    return out;
}

} // namespace nlvg::dynamics
