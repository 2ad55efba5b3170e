#pragma once

#include <array>

namespace nlvg::dynamics {

/// Largest |theta| for which Euler-rate kinematics are evaluated.
inline constexpr double kGimbalGuardRad = 85.0 * 3.14159265358979323846 / 180.0;

/**
 * Twelve-component quadcopter state in the earth frame.
 *
 * Attitude rates are treated as Euler-angle rates directly; that is only
 * valid in the mild-attitude regime, so derivative() refuses states past the
 * gimbal guard instead of transforming body rates.
 */
struct StateVector {
    double phi{}, theta{}, psi{};
    double phi_dot{}, theta_dot{}, psi_dot{};
    double x{}, y{}, z{};
    double x_dot{}, y_dot{}, z_dot{};

    static constexpr std::size_t kSize = 12;

    std::array<double, kSize> to_array() const;
    static StateVector from_array(const std::array<double, kSize>& values);

    bool finite() const;

    bool operator==(const StateVector&) const = default;
};

/// Time derivative of a StateVector shares its layout.
using StateRate = StateVector;

StateVector operator+(const StateVector& a, const StateVector& b);
StateVector operator*(double s, const StateVector& a);

struct QuadParams {
    double mass{1.2};
    double ixx{0.03}, iyy{0.03}, izz{0.05};
    double gravity{9.81};
    double drag_x{0.1}, drag_y{0.1}, drag_z{0.1};
    double thrust_max{4.0 * 1.2 * 9.81};
    double torque_max{3.0};

    /// Throws InvalidArgument when any physical invariant is violated.
    void validate() const;

    bool operator==(const QuadParams&) const = default;
};

/// Wrench-level command: planar acceleration requests plus thrust and torques.
/// The plant only consumes thrust and torques; ux/uy are carried for logging.
struct ControlInput {
    double ux{}, uy{};
    double thrust{};
    double tau_x{}, tau_y{}, tau_z{};

    bool operator==(const ControlInput&) const = default;
};

StateRate derivative(const StateVector& state, const ControlInput& input, const QuadParams& params);

/// Classical RK4 with the input held constant over dt.
StateVector step_rk4(const StateVector& state, const ControlInput& input, const QuadParams& params,
                     double dt);

ControlInput hover_input(const QuadParams& params);

ControlInput saturate(const ControlInput& input, const QuadParams& params);

} // namespace nlvg::dynamics
