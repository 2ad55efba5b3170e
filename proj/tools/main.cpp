#include "svg_plot.hpp"

#include "nlvg/campaign.hpp"
#include "nlvg/config.hpp"
#include "nlvg/error.hpp"
#include "nlvg/format.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>

namespace fs = std::filesystem;
using namespace nlvg;

namespace {

enum Exit { kOk = 0, kConfig = 1, kDiverged = 2, kInfeasible = 3 };

struct Common {
    std::vector<std::string> configs;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string scenario;
};

void write_file(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::ConfigError, "cannot write " + file.string());
    }
    out << text;
}

config::Json load(const Common& c, const std::vector<std::string>& extra = {}) {
    std::vector<fs::path> files(c.configs.begin(), c.configs.end());
    files.insert(files.end(), extra.begin(), extra.end());
    config::Json doc = config::load_documents(files);
    if (!c.scenario.empty()) {
        config::select_scenario(doc, c.scenario);
    }
    if (c.seed) {
        doc["seed"] = *c.seed;
    }
    return doc;
}

fs::path output_dir(const Common& c, const config::RunConfig& cfg) {
    fs::path dir = c.out.empty() ? cfg.output : fs::path(c.out);
    fs::create_directories(dir);
    return dir;
}

std::vector<double> column(const sim::SimLog& log, auto&& pick) {
    std::vector<double> v;
    v.reserve(log.rows.size());
    for (const auto& r : log.rows) {
        v.push_back(pick(r));
    }
    return v;
}

std::string report_text(const metrics::MetricReport& report) {
    std::string out = "controller: " + report.controller + "\n";
    out += pad_right("channel", 8) + pad_right("unit", 6) + pad_left("t_peak", 10) + pad_left("IAE", 16) +
           pad_left("ITAE", 16) + pad_left("ITSE", 16) + "\n";
    for (const auto& c : report.channels) {
        out += pad_right(c.channel, 8) + pad_right(c.unit, 6) + pad_left(format_fixed(c.t_peak, 2), 10) +
               pad_left(format_number(c.iae), 16) + pad_left(format_number(c.itae), 16) +
               pad_left(format_number(c.itse), 16) + "\n";
    }
    return out;
}

void plot_run(const fs::path& dir, const sim::SimLog& log, const std::string& label) {
    const auto t = column(log, [](const sim::SimRow& r) { return r.t; });
    constexpr double deg = 180.0 / std::numbers::pi;
    nlvgsim::Chart att{"Attitude (" + label + ")", "t [s]", "angle [deg]", {}};
    att.series.push_back({"phi", t, column(log, [](const sim::SimRow& r) { return r.state.phi * deg; })});
    att.series.push_back({"phi_d", t, column(log, [](const sim::SimRow& r) { return r.attitude_setpoint.phi * deg; })});
    att.series.push_back({"theta", t, column(log, [](const sim::SimRow& r) { return r.state.theta * deg; })});
    att.series.push_back(
        {"theta_d", t, column(log, [](const sim::SimRow& r) { return r.attitude_setpoint.theta * deg; })});
    nlvgsim::write_svg(dir / "attitude.svg", att);

    nlvgsim::Chart pos{"Position (" + label + ")", "t [s]", "position [m]", {}};
    pos.series.push_back({"x", t, column(log, [](const sim::SimRow& r) { return r.state.x; })});
    pos.series.push_back({"x_d", t, column(log, [](const sim::SimRow& r) { return r.reference.x; })});
    pos.series.push_back({"y", t, column(log, [](const sim::SimRow& r) { return r.state.y; })});
    pos.series.push_back({"y_d", t, column(log, [](const sim::SimRow& r) { return r.reference.y; })});
    pos.series.push_back({"z", t, column(log, [](const sim::SimRow& r) { return r.state.z; })});
    pos.series.push_back({"z_d", t, column(log, [](const sim::SimRow& r) { return r.reference.z; })});
    nlvgsim::write_svg(dir / "position.svg", pos);

    nlvgsim::Chart xy{"Ground track (" + label + ")", "x [m]", "y [m]", {}};
    xy.series.push_back({"reference", column(log, [](const sim::SimRow& r) { return r.reference.x; }),
                         column(log, [](const sim::SimRow& r) { return r.reference.y; })});
    xy.series.push_back({"flown", column(log, [](const sim::SimRow& r) { return r.state.x; }),
                         column(log, [](const sim::SimRow& r) { return r.state.y; })});
    nlvgsim::write_svg(dir / "ground_track.svg", xy);
}

void plot_overlay(const fs::path& dir, const campaign::CompareOutcome& cmp, const std::string& a,
                  const std::string& b) {
    const auto& la = cmp.baseline.log;
    const auto& lb = cmp.candidate.log;
    const auto t = column(la, [](const sim::SimRow& r) { return r.t; });
    constexpr double deg = 180.0 / std::numbers::pi;
    for (auto ch : {control::kPhi, control::kTheta}) {
        const std::string name(control::kChannelNames[ch]);
        auto angle = [ch](const sim::SimRow& r) { return (ch == control::kPhi ? r.state.phi : r.state.theta) * deg; };
        auto setpoint = [ch](const sim::SimRow& r) {
            return (ch == control::kPhi ? r.attitude_setpoint.phi : r.attitude_setpoint.theta) * deg;
        };
        nlvgsim::Chart c{name + " response", "t [s]", name + " [deg]", {}};
        c.series.push_back({name + "_d", t, column(la, setpoint)});
        c.series.push_back({a, t, column(la, angle)});
        c.series.push_back({b, t, column(lb, angle)});
        nlvgsim::write_svg(dir / ("overlay_" + name + ".svg"), c);
    }
    for (auto ch : {control::kX, control::kY}) {
        const std::string name(control::kChannelNames[ch]);
        auto err = [ch](const sim::SimRow& r) { return r.errors[ch]; };
        nlvgsim::Chart c{name + " tracking error", "t [s]", "e_" + name + " [m]", {}};
        c.series.push_back({a, t, column(la, err)});
        c.series.push_back({b, t, column(lb, err)});
        nlvgsim::write_svg(dir / ("overlay_error_" + name + ".svg"), c);
    }
}

std::string path_samples_csv(const std::vector<trajectory::ReferenceSample>& samples) {
    std::string out = "t,x,y,z,vx,vy,vz,ax,ay,az\n";
    for (const auto& s : samples) {
        for (double v : {s.t, s.x, s.y, s.z, s.vx, s.vy, s.vz, s.ax, s.ay, s.az}) {
            out += format_number(v);
            out += ',';
        }
        out.back() = '\n';
    }
    return out;
}

void write_path(const fs::path& dir, const config::RunConfig& cfg, const planner::PlannedPath& path) {
    write_file(dir / "path.json", config::path_to_json(path).dump(2) + "\n");
    const auto samples = planner::sample_path(path, cfg.scene->request.sample_dt);
    write_file(dir / "path_samples.csv", path_samples_csv(samples));

    std::vector<double> x, y, z;
    for (const auto& s : samples) {
        x.push_back(s.x);
        y.push_back(s.y);
        z.push_back(s.z);
    }
    nlvgsim::Chart top{"Planned path, top view", "x [m]", "y [m]", {{"path", x, y}}};
    nlvgsim::Chart side{"Planned path, side view", "x [m]", "z [m]", {{"path", x, z}}};
    for (const auto& o : cfg.scene->obstacles) {
        nlvgsim::Series ring_xy{o.id, {}, {}};
        nlvgsim::Series ring_xz{o.id, {}, {}};
        for (int i = 0; i <= 72; ++i) {
            const double a = 2.0 * std::numbers::pi * i / 72.0;
            ring_xy.x.push_back(o.center.x() + o.r_safe * std::cos(a));
            ring_xy.y.push_back(o.center.y() + o.r_safe * std::sin(a));
            ring_xz.x.push_back(o.center.x() + o.r_safe * std::cos(a));
            ring_xz.y.push_back(o.center.z() + o.r_safe * std::sin(a));
        }
        top.series.push_back(ring_xy);
        side.series.push_back(ring_xz);
    }
    nlvgsim::write_svg(dir / "path_top.svg", top);
    nlvgsim::write_svg(dir / "path_side.svg", side);
}

int cmd_simulate(const Common& c) {
    const auto cfg = config::parse(load(c));
    const auto dir = output_dir(c, cfg);
    const auto run = campaign::run_simulation(cfg);
    write_file(dir / "sim.csv", sim::to_csv(run.log));
    write_file(dir / "metrics.txt", report_text(run.report));
    plot_run(dir, run.log, cfg.controller_label());
    if (cfg.scene) {
        write_path(dir, cfg, *cfg.simulation_setup().path);
    }
    std::cout << report_text(run.report) << "wrote " << (dir / "sim.csv").string() << "\n";
    return kOk;
}

int cmd_tune(const Common& c, std::optional<int> restarts) {
    config::Json doc = load(c);
    if (restarts) {
        doc["tuning"]["restarts"] = *restarts;
    }
    const auto cfg = config::parse(doc);
    const auto dir = output_dir(c, cfg);
    const auto outcome = campaign::run_tune(cfg);
    std::string summary;
    for (const auto& g : outcome.groups) {
        write_file(dir / ("tune_trace_" + g.group.name + ".csv"), tuning::trace_csv(g.result.trace));
        const auto& r = g.result;
        summary += g.group.name + ": K1 = (" + format_number(r.k1.kp) + ", " + format_number(r.k1.ki) + ", " +
                   format_number(r.k1.kd) + ") J=" + format_number(r.cost1) + "\n";
        summary += std::string(g.group.name.size(), ' ') + "  K2 = (" + format_number(r.k2.kp) + ", " +
                   format_number(r.k2.ki) + ", " + format_number(r.k2.kd) + ") J=" + format_number(r.cost2) + "\n";
        const char* names[] = {"kp", "ki", "kd"};
        for (std::size_t i = 0; i < 3; ++i) {
            if (r.inverted[i]) {
                summary += "  warning: " + std::string(names[i]) + " bound inverted (K2 < K1), amplitude set to 0\n";
            }
        }
    }
    write_file(dir / "tuned.json", outcome.fragment.dump(2) + "\n");
    write_file(dir / "tune_summary.txt", summary);
    std::cout << summary << "wrote " << (dir / "tuned.json").string() << "\n";
    return kOk;
}

int cmd_plan(const Common& c, const std::string& scene_file) {
    config::Json doc = load(c);
    if (!scene_file.empty()) {
        doc["scene"] = fs::absolute(scene_file).string();
    }
    const auto cfg = config::parse(doc);
    if (!cfg.scene) {
        throw Error(ErrorCode::ConfigError, "plan needs a scene (config key 'scene' or --scene)");
    }
    const auto dir = output_dir(c, cfg);
    const auto path = planner::plan_detour(cfg.scene->request, cfg.scene->obstacles);
    write_path(dir, cfg, path);
    std::cout << "segments: " << path.segments.size() << ", duration " << format_fixed(path.total_duration(), 3)
              << " s, min clearance " << format_fixed(path.min_clearance_margin, 4) << " m\n"
              << "wrote " << (dir / "path.json").string() << "\n";
    return kOk;
}

int cmd_compare(const Common& c, const std::vector<std::string>& config_b, bool tuned) {
    if (config_b.empty() == !tuned) {
        throw Error(ErrorCode::ConfigError, "compare needs exactly one of --config-b or --tuned");
    }
    const auto a = config::parse(load(c));
    const auto dir = output_dir(c, a);
    config::RunConfig b;
    if (tuned) {
        // Tuning always runs on step episodes; the comparison uses the chosen scenario.
        const auto outcome = campaign::run_tune(a);
        write_file(dir / "tuned.json", outcome.fragment.dump(2) + "\n");
        b = outcome.tuned;
    } else {
        b = config::parse(load(c, config_b));
    }
    const auto cmp = campaign::run_compare(a, b);
    write_file(dir / "comparison.csv", metrics::format_csv(cmp.comparison));
    write_file(dir / "comparison.txt", metrics::format_table(cmp.comparison));
    write_file(dir / "sim_a.csv", sim::to_csv(cmp.baseline.log));
    write_file(dir / "sim_b.csv", sim::to_csv(cmp.candidate.log));
    plot_overlay(dir, cmp, a.controller_label() + " (A)", b.controller_label() + " (B)");
    std::cout << metrics::format_table(cmp.comparison) << "wrote " << (dir / "comparison.csv").string() << "\n";
    return kOk;
}

int exit_code(ErrorCode code) {
    switch (code) {
    case ErrorCode::SimulationDiverged:
    case ErrorCode::EpisodeDiverged:
    case ErrorCode::GimbalLock:
    case ErrorCode::NonFinite: return kDiverged;
    case ErrorCode::PlanInfeasible:
    case ErrorCode::NoVerticalRoom: return kInfeasible;
    default: return kConfig;
    }
}

void add_common(CLI::App* cmd, Common& c, bool scenario) {
    cmd->add_option("--config", c.configs, "config file; repeat to layer overrides")->required();
    cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
    cmd->add_option("--out", c.out, "output directory (overrides the config)");
    if (scenario) {
        cmd->add_option("--scenario", c.scenario, "trajectory to run")
            ->check(CLI::IsMember({"step", "storm", "lissajous"}));
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cascaded PID / NLVG-PID quadcopter simulator"};
    app.require_subcommand(1);

    Common sim_opts, tune_opts, plan_opts, cmp_opts;
    auto* simulate = app.add_subcommand("simulate", "run one closed-loop simulation");
    add_common(simulate, sim_opts, true);

    std::array<Common, 3> fig_opts;
    const char* fig_names[] = {"step", "storm", "lissajous"};
    std::array<CLI::App*, 3> figs{};
    for (std::size_t i = 0; i < 3; ++i) {
        figs[i] = app.add_subcommand(fig_names[i], std::string("simulate the ") + fig_names[i] + " scenario");
        add_common(figs[i], fig_opts[i], false);
        fig_opts[i].scenario = fig_names[i];
    }

    auto* tune = app.add_subcommand("tune", "learn NLVG gain bounds with extremum seeking");
    add_common(tune, tune_opts, false);
    std::optional<int> restarts;
    tune->add_option("--restarts", restarts, "ES restarts per campaign")->check(CLI::PositiveNumber);

    auto* plan = app.add_subcommand("plan", "plan an obstacle-avoiding path");
    add_common(plan, plan_opts, false);
    std::string scene_file;
    plan->add_option("--scene", scene_file, "scene file (overrides the config)")->check(CLI::ExistingFile);

    auto* compare = app.add_subcommand("compare", "compare two controllers on one scenario");
    add_common(compare, cmp_opts, true);
    std::vector<std::string> config_b;
    bool tuned = false;
    compare->add_option("--config-b", config_b, "overlay files that turn config A into config B");
    compare->add_flag("--tuned", tuned, "tune first and compare against the tuned NLVG controller");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(sim_opts);
        }
        for (std::size_t i = 0; i < 3; ++i) {
            if (figs[i]->parsed()) {
                return cmd_simulate(fig_opts[i]);
            }
        }
        if (tune->parsed()) {
            return cmd_tune(tune_opts, restarts);
        }
        if (plan->parsed()) {
            return cmd_plan(plan_opts, scene_file);
        }
        return cmd_compare(cmp_opts, config_b, tuned);
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    }
}
