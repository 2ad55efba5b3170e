#pragma once

#include "nlvg/trajectory.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <string>
#include <vector>

namespace nlvg::planner {

using Vec3 = Eigen::Vector3d;

struct ObstacleSphere {
    Vec3 center{Vec3::Zero()};
    double r_safe{1.0};
    std::string id;
};

struct PlannerOptions {
    /// Standoff before/after a sphere, as a multiple of R_safe.
    double standoff_factor{2.0};
    double margin{0.5};
    double inflation{1.5};
    int max_inflations{5};
    /// Arc spacing used when sampling clearance (m).
    double clearance_step{0.05};
    /// Duration assigned to zero-length segments (s).
    double min_duration{0.01};
};

struct PlanRequest {
    std::vector<Vec3> waypoints;
    double v_max{2.0};
    double a_max{2.0};
    double z_min{0.0};
    double z_max{50.0};
    double sample_dt{0.01};
    PlannerOptions options{};

    void validate() const;
};

/// Cubic Bezier in the E-frame; duration maps u in [0,1] to [0, duration] s.
struct BezierSegment {
    std::array<Vec3, 4> ctrl;
    double duration{0.0};

    Vec3 point(double u) const;
    Vec3 d1(double u) const; ///< dB/du
    Vec3 d2(double u) const; ///< d2B/du2
    double polygon_length() const;
};

enum class SegmentRole { Leg, Detour };

struct PlannedPath {
    std::vector<BezierSegment> segments;
    std::vector<SegmentRole> roles;
    /// Per-sample clearance in path order: min over spheres of (|p - center| - R_safe), m.
    /// Non-negative everywhere on an accepted path.
    std::vector<double> clearance;
    double min_clearance_margin{0.0};
    bool velocity_ok{true};
    bool acceleration_ok{true};
    bool corridor_ok{true};
    bool lateral_fallback{false};
    /// Margin that produced the final geometry after inflation.
    double final_margin{0.0};

    double total_duration() const;
};

struct Conflict {
    std::size_t leg{};
    std::size_t sphere{};   ///< index into the obstacle list
    std::string sphere_id;
    double entry{};          ///< leg parameter in [0, 1]
    double exit{};
};

/// Exact segment/closed-ball intersection per leg, ordered along the route.
std::vector<Conflict> detect_conflicts(const PlanRequest& request,
                                       const std::vector<ObstacleSphere>& obstacles);

enum class Vertical { Over, Under };

struct Decision {
    Vertical side{Vertical::Over};
    Vec3 apex{Vec3::Zero()};
    double detour_length{};
};

/// Over/under choice by shorter Euclidean entry->apex->exit length, with the
/// apex inside the altitude corridor; ties go Over. Throws NoVerticalRoom.
Decision vertical_decision(const Conflict& conflict, const ObstacleSphere& sphere,
                           const PlanRequest& request, double margin);

/// Geometry plus time parameterisation. Throws PlanInfeasible.
PlannedPath plan_detour(const PlanRequest& request, const std::vector<ObstacleSphere>& obstacles);

/// Minimal per-segment durations meeting v_max / a_max on sampled derivatives.
PlannedPath time_parameterize(PlannedPath path, double v_max, double a_max,
                              double min_duration = 0.01);

/// Position/velocity/acceleration at path time t (clamped to [0, total]).
trajectory::ReferenceSample path_reference(const PlannedPath& path, double t);

/// Uniform samples at dt plus a final sample at the total duration.
std::vector<trajectory::ReferenceSample> sample_path(const PlannedPath& path, double dt,
                                                     trajectory::YawMode yaw = trajectory::YawMode::Zero);

/// Smallest distance minus R_safe over `samples_per_segment` uniform samples of each segment.
double sampled_clearance_margin(const PlannedPath& path, const std::vector<ObstacleSphere>& obstacles,
                                std::size_t samples_per_segment);

} // namespace nlvg::planner
