#pragma once

#include "nlvg/config.hpp"
#include "nlvg/metrics.hpp"
#include "nlvg/simulation.hpp"
#include "nlvg/tuning.hpp"

#include <string>
#include <vector>

namespace nlvg::campaign {

/// Attitude first (roll step, schedules shared by roll and pitch), then the
/// planar position loop tuned on top of the scheduled attitude loop.
std::vector<config::TuningGroup> default_groups();

struct GroupOutcome {
    config::TuningGroup group;
    tuning::TuneResult result;
};

struct TuneOutcome {
    std::vector<GroupOutcome> groups;
    /// Controller fragment that switches a config to the tuned NLVG schedules.
    config::Json fragment;
    /// Input config with the fragment applied.
    config::RunConfig tuned;
};

/// Convex bowl used by the synthetic cost mode; the minimizer depends on the amplitude.
tuning::GainVector synthetic_minimizer(double amplitude);
double synthetic_cost(const tuning::GainVector& k, double amplitude);

/// Runs every tuning group in order; each group starts from the schedules of
/// the previous ones. Group seeds derive from the config seed.
TuneOutcome run_tune(const config::RunConfig& cfg);

struct SimOutcome {
    sim::SimLog log;
    metrics::MetricReport report;
};

SimOutcome run_simulation(const config::RunConfig& cfg);

struct CompareOutcome {
    SimOutcome baseline;
    SimOutcome candidate;
    metrics::Comparison comparison;
};

/// ConfigMismatch unless both configs share plant, trajectory, scene and timing.
CompareOutcome run_compare(const config::RunConfig& baseline, const config::RunConfig& candidate);

} // namespace nlvg::campaign
