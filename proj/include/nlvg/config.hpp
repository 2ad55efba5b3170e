#pragma once

#include "nlvg/control.hpp"
#include "nlvg/dynamics.hpp"
#include "nlvg/planner.hpp"
#include "nlvg/simulation.hpp"
#include "nlvg/trajectory.hpp"
#include "nlvg/tuning.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nlvg::config {

using Json = nlohmann::json;

enum class ControllerMode { Pid, Nlvg };

/// One ES campaign pair: which channel is stepped and which channels get the schedule.
struct TuningGroup {
    std::string name;
    control::Channel step_channel{control::kPhi};
    std::vector<control::Channel> apply_to{control::kPhi, control::kTheta};
    double small_amplitude{0.05};
    double large_amplitude{0.5};
    double t0{0.0};
    double tf{3.0};
    std::array<std::pair<double, double>, 3> init_range{{{0.0, 20.0}, {0.0, 1.0}, {0.0, 10.0}}};
};

enum class CostMode { Simulation, Synthetic };

struct TuningSettings {
    tuning::EsConfig es{};
    double delta1{0.01};
    double delta2{0.838};
    double penalty{1e6};
    CostMode cost{CostMode::Simulation};
    std::vector<TuningGroup> groups;
};

struct Scene {
    planner::PlanRequest request{};
    std::vector<planner::ObstacleSphere> obstacles;
};

struct RunConfig {
    dynamics::QuadParams plant{};
    ControllerMode mode{ControllerMode::Pid};
    control::CascadeConfig controller{control::CascadeConfig::baseline_gains()};
    trajectory::TrajectorySpec trajectory{};
    std::optional<Scene> scene{};
    dynamics::StateVector initial{};
    double dt{0.01};
    double t_total{140.0};
    std::uint64_t seed{1};
    sim::MetricWindows peak_windows{};
    /// Metric window for path runs; nullopt means the whole run.
    std::optional<double> path_window{};
    TuningSettings tuning{};
    std::filesystem::path output{"out"};

    /// Original merged document; used for plant/trajectory equality checks.
    Json document;

    void validate() const;
    sim::SimulationSetup simulation_setup() const;
    sim::MetricWindows metric_windows() const;
    std::string controller_label() const;
};

/// Reads and merges (RFC 7386 merge patch) the files in order. Relative scene
/// paths resolve against the file that named them.
Json load_documents(const std::vector<std::filesystem::path>& files);

/// Strict parse: unknown keys and wrong types raise ConfigError.
RunConfig parse(const Json& doc);

/// Apply a scenario name ("step", "storm", "lissajous") to the trajectory type.
void select_scenario(Json& doc, const std::string& scenario);

Scene parse_scene(const Json& doc);
Scene load_scene(const std::filesystem::path& file);

/// Config fragment that switches to NLVG mode with the given channel schedules.
Json nlvg_fragment(const std::vector<std::pair<control::Channel, control::ChannelGains>>& channels,
                   control::ScheduleSignals signals);

Json path_to_json(const planner::PlannedPath& path);

} // namespace nlvg::config
