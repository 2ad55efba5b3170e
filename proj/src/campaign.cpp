#include "nlvg/campaign.hpp"

#include "nlvg/error.hpp"

#include <cmath>

namespace nlvg::campaign {

std::vector<config::TuningGroup> default_groups() {
    config::TuningGroup attitude;
    attitude.name = "attitude";
    attitude.step_channel = control::kPhi;
    attitude.apply_to = {control::kPhi, control::kTheta};
    attitude.small_amplitude = 0.05;
    attitude.large_amplitude = 0.5;
    attitude.t0 = 0.0;
    attitude.tf = 3.0;

    config::TuningGroup position;
    position.name = "position";
    position.step_channel = control::kX;
    position.apply_to = {control::kX, control::kY};
    position.small_amplitude = 0.1;
    position.large_amplitude = 2.0;
    position.t0 = 0.0;
    position.tf = 8.0;
    return {attitude, position};
}

tuning::GainVector synthetic_minimizer(double amplitude) {
    const double a = std::abs(amplitude);
    return {5.0 + 10.0 * a, 0.1 + 0.2 * a, 1.0 + 4.0 * a};
}

double synthetic_cost(const tuning::GainVector& k, double amplitude) {
    const auto m = synthetic_minimizer(amplitude);
    const double w[3] = {1.0, 4.0, 2.0};
    double j = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        j += w[i] * (k[i] - m[i]) * (k[i] - m[i]);
    }
    return j;
}

namespace {

tuning::CostFunction group_cost(const config::RunConfig& cfg, const config::TuningGroup& g, double amplitude,
                                const control::CascadeConfig& base) {
    if (cfg.tuning.cost == config::CostMode::Synthetic) {
        return [amplitude](const tuning::GainVector& k) { return synthetic_cost(k, amplitude); };
    }
    tuning::CostSpec spec;
    spec.t0 = g.t0;
    spec.tf = g.tf;
    spec.channel = g.step_channel;
    spec.amplitude = amplitude;
    spec.apply_to = g.apply_to;
    spec.penalty = cfg.tuning.penalty;
    spec.dt = cfg.dt;
    return tuning::make_cost(spec, cfg.plant, base);
}

} // namespace

TuneOutcome run_tune(const config::RunConfig& cfg) {
    const auto groups = cfg.tuning.groups.empty() ? default_groups() : cfg.tuning.groups;
    control::CascadeConfig base = cfg.controller;
    TuneOutcome out;
    std::vector<std::pair<control::Channel, control::ChannelGains>> tuned_channels;

    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& g = groups[gi];
        tuning::EsConfig es = cfg.tuning.es;
        es.seed = tuning::child_seed(cfg.seed, 0, static_cast<int>(gi));
        es.init_range = g.init_range;
        tuning::TuneResult result;
        try {
            result = tuning::tune_bounds(es, group_cost(cfg, g, g.small_amplitude, base),
                                         group_cost(cfg, g, g.large_amplitude, base), cfg.tuning.delta1,
                                         cfg.tuning.delta2);
        } catch (const Error& e) {
            throw Error(e.code(), "tuning group '" + g.name + "': " + e.what());
        }
        const auto gains = result.channel_gains();
        for (auto ch : g.apply_to) {
            base.gains[ch] = gains;
            tuned_channels.emplace_back(ch, gains);
        }
        out.groups.push_back({g, std::move(result)});
    }

    out.fragment = config::nlvg_fragment(tuned_channels, cfg.controller.options.signals);
    config::Json doc = cfg.document;
    doc.merge_patch(out.fragment);
    out.tuned = config::parse(doc);
    return out;
}

SimOutcome run_simulation(const config::RunConfig& cfg) {
    SimOutcome out;
    out.log = sim::run_simulation(cfg.simulation_setup());
    out.report = sim::report_metrics(out.log, cfg.metric_windows(), cfg.controller_label());
    return out;
}

CompareOutcome run_compare(const config::RunConfig& baseline, const config::RunConfig& candidate) {
    auto scene_of = [](const config::RunConfig& c) {
        return c.document.contains("scene") ? c.document.at("scene") : config::Json();
    };
    if (!(baseline.plant == candidate.plant)) {
        throw Error(ErrorCode::ConfigMismatch, "compared configs use different plants");
    }
    if (!(baseline.trajectory == candidate.trajectory) || scene_of(baseline) != scene_of(candidate)) {
        throw Error(ErrorCode::ConfigMismatch, "compared configs use different trajectories");
    }
    if (baseline.dt != candidate.dt || baseline.t_total != candidate.t_total ||
        !(baseline.initial == candidate.initial)) {
        throw Error(ErrorCode::ConfigMismatch, "compared configs use different timing or initial state");
    }
    CompareOutcome out;
    out.baseline = run_simulation(baseline);
    out.candidate = run_simulation(candidate);
    out.comparison = metrics::compare(out.baseline.report, out.candidate.report);
    return out;
}

} // namespace nlvg::campaign
