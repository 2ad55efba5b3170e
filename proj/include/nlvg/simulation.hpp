#pragma once

#include "nlvg/control.hpp"
#include "nlvg/dynamics.hpp"
#include "nlvg/metrics.hpp"
#include "nlvg/planner.hpp"
#include "nlvg/trajectory.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nlvg::sim {

struct SimulationSetup {
    dynamics::QuadParams plant{};
    control::CascadeConfig controller{control::CascadeConfig::baseline_gains()};
    trajectory::TrajectorySpec trajectory{};
    /// When set, the planned path replaces the trajectory generator.
    std::optional<planner::PlannedPath> path{};
    dynamics::StateVector initial{};
    double dt{0.01};
    double t_total{140.0};
    /// Any |position| or |rate| beyond this counts as divergence.
    double divergence_bound{1e4};

    void validate() const;
};

struct SimRow {
    double t{};
    dynamics::StateVector state{};
    trajectory::ReferenceSample reference{};
    control::AttitudeSetpoint attitude_setpoint{};
    dynamics::ControlInput input{};
    std::array<double, control::kChannelCount> errors{};
};

struct SimLog {
    double dt{};
    std::vector<SimRow> rows;

    /// Error samples of one channel; attitude channels can be converted to degrees.
    metrics::ErrorSeries error_series(control::Channel channel, bool attitude_in_degrees = false) const;
};

/// floor(t_total/dt) + 1, robust to representation error in the ratio.
std::size_t row_count(double t_total, double dt);

/// Closed loop: reference -> cascade_update -> saturate -> step_rk4, one row
/// per step. Throws SimulationDiverged naming the failing step.
SimLog run_simulation(const SimulationSetup& setup);

struct MetricWindows {
    double attitude{0.15};
    double position{0.37};
};

/// Report over phi, theta, x, y (attitude in degrees).
metrics::MetricReport report_metrics(const SimLog& log, const MetricWindows& windows,
                                     std::string controller_label);

std::string csv_header();
/// Whole log as CSV; every number via format_number.
std::string to_csv(const SimLog& log);

} // namespace nlvg::sim
