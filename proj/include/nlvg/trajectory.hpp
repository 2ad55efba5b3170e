#pragma once

#include <string_view>
#include <variant>

namespace nlvg::trajectory {

/// One reference sample. vel/acc are analytic derivatives of pos.
/// When attitude_override is set the controller tracks phi_d/theta_d directly
/// and skips the planar position loop (inner-loop step experiments).
struct ReferenceSample {
    double t{};
    double x{}, y{}, z{};
    double vx{}, vy{}, vz{};
    double ax{}, ay{}, az{};
    double psi_d{};
    bool attitude_override{false};
    double phi_d{}, theta_d{};

    bool finite() const;
};

/// Attitude steps roll and pitch together.
enum class StepChannel { X, Y, Z, Phi, Theta, Psi, Attitude };

std::string_view to_string(StepChannel channel);
StepChannel step_channel_from_string(std::string_view name);

struct StepSpec {
    StepChannel channel{StepChannel::Phi};
    double amplitude{0.5};
    double t_start{0.0};

    bool operator==(const StepSpec&) const = default;
};

/// Hold at the origin, ramp linearly to the spiral start, then follow an
/// archimedean spiral r = r0 + c*tau at constant angular rate.
struct StormSpec {
    double r0{1.0};
    double radial_rate{0.05};
    double omega{0.15};
    double z0{10.0};
    double climb_rate{0.0};
    double t_takeoff{20.0};
    double ramp_time{5.0};

    bool operator==(const StormSpec&) const = default;
};

/// x = Ax sin(a w t), y = Ay sin(b w t + phase), z = z0 + Az sin(c w t).
/// With ramp_time > 0 the altitude is scaled by t/ramp_time until the ramp ends
/// (takeoff from the ground at t = 0).
struct LissajousSpec {
    double ax{5.0}, ay{5.0}, az{2.0};
    double a{1.0}, b{2.0}, c{1.0};
    double phase{0.0};
    double omega{0.1};
    double z0{10.0};
    double ramp_time{0.0};

    bool operator==(const LissajousSpec&) const = default;
};

enum class YawMode { Zero, Tangent };

std::string_view to_string(YawMode mode);
YawMode yaw_mode_from_string(std::string_view name);

struct TrajectorySpec {
    std::variant<StepSpec, StormSpec, LissajousSpec> shape{StormSpec{}};
    double duration{140.0};
    YawMode yaw{YawMode::Zero};

    void validate() const;
    bool operator==(const TrajectorySpec&) const = default;
};

ReferenceSample step_reference(const StepSpec& spec, double t);
ReferenceSample storm_reference(const StormSpec& spec, double t);
ReferenceSample lissajous_reference(const LissajousSpec& spec, double t);

/// Dispatches on the shape; psi_d is the generator's own value (step on psi,
/// zero otherwise). Apply YawTracker for tangent yaw.
ReferenceSample sample_reference(const TrajectorySpec& spec, double t);

/// Pure yaw rule: Zero -> 0; Tangent -> atan2(vy, vx) unwrapped onto
/// `previous`, holding `previous` when the planar velocity vanishes.
double yaw_policy(YawMode mode, double vx, double vy, double previous);

/// Stateful wrapper over yaw_policy that carries the unwrapped heading.
class YawTracker {
public:
    explicit YawTracker(YawMode mode) : mode_(mode) {}

    double update(double vx, double vy);
    void apply(ReferenceSample& sample) { sample.psi_d = update(sample.vx, sample.vy); }

private:
    YawMode mode_;
    double previous_{0.0};
};

} // namespace nlvg::trajectory
