// One PASS/FAIL line per acceptance criterion; exit status is non-zero on any FAIL.
#include "golden_support.hpp"
#include "scene_fixture.hpp"

#include "nlvg/campaign.hpp"
#include "nlvg/config.hpp"
#include "nlvg/control.hpp"
#include "nlvg/dynamics.hpp"
#include "nlvg/error.hpp"
#include "nlvg/format.hpp"
#include "nlvg/metrics.hpp"
#include "nlvg/planner.hpp"
#include "nlvg/tuning.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

using namespace nlvg;

namespace {

const std::filesystem::path kConfigDir = NLVG_CONFIG_DIR;
const std::filesystem::path kGoldenDir = NLVG_GOLDEN_DIR;

struct Verdict {
    bool pass{true};
    std::string detail;
};

class Check {
public:
    void require(bool ok, const std::string& what) {
        if (!ok && v_.pass) {
            v_.pass = false;
            v_.detail = what;
        }
    }
    void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
    Verdict verdict() const {
        Verdict v = v_;
        if (v.pass) {
            v.detail = notes_;
        }
        return v;
    }

private:
    Verdict v_;
    std::string notes_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int decimals = 2) { return format_fixed(v, decimals); }

config::Json defaults_doc() { return config::load_documents({kConfigDir / "paper_defaults.json"}); }

config::RunConfig scenario_config(config::Json doc, const std::string& scenario) {
    config::select_scenario(doc, scenario);
    return config::parse(doc);
}

// 1. Gain law properties over random schedules and signal grids.
Verdict gain_law() {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    std::mt19937_64 rng(20240101);
    std::uniform_real_distribution<double> uk(0.0, 50.0), ua(0.0, 20.0), ud1(0.0, 1.0), uw(1e-3, 2.0);
    const int grid = 200;
    for (int n = 0; n < 10000; ++n) {
        control::NlvgSchedule s{uk(rng), ua(rng), 0.0, 0.0};
        s.delta1 = ud1(rng);
        s.delta2 = s.delta1 + uw(rng);
        const double eps = 1e-12;
        for (double d : {s.delta1, s.delta2}) {
            const double jump = std::abs(control::nlvg_gain(d + eps, s) - control::nlvg_gain(std::max(0.0, d - eps), s));
            c.require(jump < 1e-6, "jump " + std::to_string(jump) + " at schedule " + std::to_string(n));
        }
        double prev = -1.0;
        for (int i = 0; i <= grid; ++i) {
            const double sig = (s.delta2 + 1.0) * i / grid;
            const double g = control::nlvg_gain(sig, s);
            c.require(g >= prev, "not monotone at schedule " + std::to_string(n));
            c.require(g >= s.k1 && g <= s.upper(), "out of [k1, k1+2A] at schedule " + std::to_string(n));
            if (sig <= s.delta1) {
                c.require(g == s.k1, "lower bound not exact at schedule " + std::to_string(n));
            }
            if (sig >= s.delta2) {
                c.require(g == s.upper(), "upper bound not exact at schedule " + std::to_string(n));
            }
            prev = g;
        }
    }
    const double secs = seconds_since(t0);
    c.require(secs < 5.0, "runtime " + fmt(secs) + " s");
    c.note("10000 schedules x 201 signals, " + fmt(secs) + " s");
    return c.verdict();
}

// 2. NLVG with zero amplitude reproduces fixed PID bit for bit on the storm run.
Verdict degenerate_equivalence() {
    Check c;
    const auto pid = scenario_config(defaults_doc(), "storm");
    auto flat = defaults_doc();
    flat["controller"]["mode"] = "nlvg";
    const auto nlvg = scenario_config(flat, "storm");
    c.require(nlvg.mode == config::ControllerMode::Nlvg, "config did not switch to nlvg");
    c.require(pid.t_total == 140.0, "storm run is not 140 s");
    const auto a = campaign::run_simulation(pid).log;
    const auto b = campaign::run_simulation(nlvg).log;
    c.require(a.rows.size() == b.rows.size(), "row counts differ");
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < std::min(a.rows.size(), b.rows.size()); ++i) {
        const auto& ua = a.rows[i].input;
        const auto& ub = b.rows[i].input;
        const double va[6] = {ua.ux, ua.uy, ua.thrust, ua.tau_x, ua.tau_y, ua.tau_z};
        const double vb[6] = {ub.ux, ub.uy, ub.thrust, ub.tau_x, ub.tau_y, ub.tau_z};
        mismatches += std::memcmp(va, vb, sizeof va) != 0 ? 1 : 0;
    }
    c.require(mismatches == 0, std::to_string(mismatches) + " command rows differ");
    c.require(sim::to_csv(a) == sim::to_csv(b), "CSV logs differ");
    c.note(std::to_string(a.rows.size()) + " rows bitwise identical");
    return c.verdict();
}

// 3. Dynamics oracles.
Verdict dynamics_oracles() {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    const dynamics::QuadParams p;
    dynamics::StateVector hover;
    hover.z = 10.0;
    auto s = hover;
    for (int i = 0; i < 1000; ++i) {
        s = dynamics::step_rk4(s, dynamics::hover_input(p), p, 0.01);
    }
    double drift = 0.0;
    const auto sa = s.to_array();
    const auto ha = hover.to_array();
    for (std::size_t i = 0; i < sa.size(); ++i) {
        drift = std::max(drift, std::abs(sa[i] - ha[i]));
    }
    c.require(drift < 1e-9, "hover drift " + std::to_string(drift));

    auto nd = p;
    nd.drag_x = nd.drag_y = nd.drag_z = 0.0;
    dynamics::ControlInput off;
    s = hover;
    for (int i = 0; i < 100; ++i) {
        s = dynamics::step_rk4(s, off, nd, 0.01);
    }
    const double ballistic = std::abs(s.z - (10.0 - 0.5 * p.gravity));
    c.require(ballistic < 1e-6, "free-fall error " + std::to_string(ballistic));

    // Linear drag fall has a closed form and is not polynomial, so RK4 shows its order.
    auto dp = p;
    dp.drag_z = 2.0;
    dp.mass = 1.0;
    const auto exact = [&](double t) {
        const double k = dp.drag_z, m = dp.mass, g = dp.gravity;
        return 10.0 - g * m / k * t + g * m * m / (k * k) * (1.0 - std::exp(-k * t / m));
    };
    auto run = [&](double dt, int n) {
        auto st = hover;
        for (int i = 0; i < n; ++i) {
            st = dynamics::step_rk4(st, off, dp, dt);
        }
        return std::abs(st.z - exact(1.0));
    };
    const double ratio = run(0.1, 10) / run(0.05, 20);
    c.require(ratio >= 8.0, "RK4 ratio " + fmt(ratio));
    const double secs = seconds_since(t0);
    c.require(secs < 5.0, "runtime " + fmt(secs) + " s");
    c.note("drift " + format_number(drift) + ", free fall " + format_number(ballistic) + ", order ratio " +
           fmt(ratio, 1));
    return c.verdict();
}

// 4. ES correctness; the full-tune determinism part uses the traces from criterion 5.
Verdict es_correctness(const std::string& trace_a, const std::string& trace_b) {
    Check c;
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(0.05, 10.0), w(-3.0, 3.0);
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
        const double q[3] = {w(rng), w(rng), w(rng)};
        const double l[3] = {w(rng), w(rng), w(rng)};
        const double cross = w(rng);
        const auto f = [&](const tuning::GainVector& k) {
            return q[0] * k.kp * k.kp + q[1] * k.ki * k.ki + q[2] * k.kd * k.kd + cross * k.kp * k.ki +
                   l[0] * k.kp + l[1] * k.ki + l[2] * k.kd;
        };
        const tuning::GainVector k{u(rng), u(rng), u(rng)};
        const auto g = tuning::grad_estimate(k, 0.01, f);
        const double exact[3] = {2 * q[0] * k.kp + cross * k.ki + l[0], 2 * q[1] * k.ki + cross * k.kp + l[1],
                                 2 * q[2] * k.kd + l[2]};
        for (int i = 0; i < 3; ++i) {
            worst = std::max(worst, std::abs(g.grad[i] - exact[i]));
        }
    }
    c.require(worst <= 1e-9, "central difference error " + format_number(worst));

    tuning::EsConfig cfg;
    cfg.alpha = 0.1;
    cfg.tol = 1e-14;
    const tuning::GainVector target{2.0, 1.0, 0.5};
    const auto res = tuning::es_descend({0.0, 0.0, 0.0}, cfg, [&](const tuning::GainVector& k) {
        return (k.kp - 2.0) * (k.kp - 2.0) + 2.0 * (k.ki - 1.0) * (k.ki - 1.0) + 3.0 * (k.kd - 0.5) * (k.kd - 0.5);
    });
    double dist = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        dist = std::max(dist, std::abs(res.best[i] - target[i]));
    }
    c.require(dist < 1e-3, "es_descend off by " + format_number(dist));
    c.require(res.trace.back().iter <= 200, "es_descend used more than 200 iterations");
    c.require(!trace_a.empty() && trace_a == trace_b, "tune traces differ between identical runs");
    c.note("gradient error " + format_number(worst) + ", descent error " + format_number(dist) + " after " +
           std::to_string(res.trace.back().iter) + " iterations, tune traces byte-identical (" +
           std::to_string(trace_a.size()) + " bytes)");
    return c.verdict();
}

std::string all_traces(const campaign::TuneOutcome& t) {
    std::string out;
    for (const auto& g : t.groups) {
        out += g.group.name + '\n' + tuning::trace_csv(g.result.trace);
    }
    return out;
}

double improvement(const metrics::Comparison& cmp, const std::string& ch, const std::string& metric) {
    return cmp.row(ch, metric).improvement_pct;
}

// 5. Attitude step: tuned NLVG no worse than PID on all metrics, IAE better by >= 5 %.
Verdict attitude_step(const config::RunConfig& pid, const config::RunConfig& tuned, double tune_secs) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    const auto out = campaign::run_compare(pid, tuned);
    std::string detail;
    for (const std::string ch : {"phi", "theta"}) {
        for (const std::string m : {"IAE", "ITAE", "ITSE"}) {
            const auto& row = out.comparison.row(ch, m);
            c.require(row.candidate <= row.baseline, ch + " " + m + " NLVG " + fmt(row.candidate, 4) + " > PID " +
                                                         fmt(row.baseline, 4));
        }
        const double iae = improvement(out.comparison, ch, "IAE");
        c.require(iae >= 5.0, ch + " IAE improvement " + fmt(iae) + " % < 5 %");
        detail += ch + " IAE/ITAE/ITSE " + fmt(iae, 1) + "/" + fmt(improvement(out.comparison, ch, "ITAE"), 1) +
                  "/" + fmt(improvement(out.comparison, ch, "ITSE"), 1) + " % ";
    }
    const double secs = tune_secs + seconds_since(t0);
    c.require(secs < 120.0, "runtime " + fmt(secs) + " s");
    c.note(detail + "(" + fmt(secs, 1) + " s incl. tuning)");
    return c.verdict();
}

// 6. Lissajous run: attitude IAE better by >= 20 %, position IAE by >= 5 %.
Verdict lissajous(const config::RunConfig& pid, const config::RunConfig& tuned) {
    Check c;
    const auto out = campaign::run_compare(pid, tuned);
    std::string detail;
    for (const std::string ch : {"phi", "theta"}) {
        const double v = improvement(out.comparison, ch, "IAE");
        c.require(v >= 20.0, ch + " IAE improvement " + fmt(v) + " % < 20 %");
        detail += ch + " " + fmt(v, 1) + " % ";
    }
    for (const std::string ch : {"x", "y"}) {
        const double v = improvement(out.comparison, ch, "IAE");
        c.require(v >= 5.0, ch + " IAE improvement " + fmt(v) + " % < 5 %");
        detail += ch + " " + fmt(v, 1) + " % ";
    }
    c.note("IAE improvement " + detail);
    return c.verdict();
}

// 7. Planner on seeded 20-sphere scenes plus an infeasible corridor.
Verdict planner_scenes() {
    Check c;
    int feasible = 0;
    int infeasible = 0;
    double worst_dense = std::numeric_limits<double>::infinity();
    double worst_sampled = std::numeric_limits<double>::infinity();
    double worst_angle = 0.0;
    double worst_gap = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto scene = fixture::random_scene(seed, 20);
        try {
            const auto path = planner::plan_detour(scene.request, scene.obstacles);
            ++feasible;
            const double dense = fixture::dense_clearance(path, scene.obstacles, scene.request.options.clearance_step);
            worst_dense = std::min(worst_dense, dense);
            worst_sampled = std::min(worst_sampled, path.min_clearance_margin);
            const auto js = fixture::join_stats(path);
            worst_angle = std::max(worst_angle, js.max_angle);
            worst_gap = std::max(worst_gap, js.max_gap);
            c.require(path.min_clearance_margin >= 0.0, "planner clearance < 0 on seed " + std::to_string(seed));
            c.require(dense >= 0.0, "dense oracle clearance " + format_number(dense) + " on seed " +
                                        std::to_string(seed));
            c.require(js.max_gap <= 1e-9 && js.max_angle <= 1e-6, "join tolerance exceeded on seed " +
                                                                       std::to_string(seed));
        } catch (const Error& e) {
            c.require(e.code() == ErrorCode::PlanInfeasible, std::string("unexpected error ") + e.what());
            ++infeasible;
        }
    }
    c.require(feasible > 0, "no feasible scene");

    // A wall of spheres spanning the whole corridor.
    planner::PlanRequest wall_req;
    wall_req.waypoints = {planner::Vec3(0.0, 0.0, 10.0), planner::Vec3(20.0, 0.0, 10.0)};
    wall_req.z_min = 5.0;
    wall_req.z_max = 15.0;
    std::vector<planner::ObstacleSphere> wall;
    for (int iy = -20; iy <= 20; ++iy) {
        for (int iz = 2; iz <= 18; ++iz) {
            wall.push_back({planner::Vec3(10.0, iy * 1.5, iz * 1.0), 1.2, "w"});
        }
    }
    bool wall_ok = false;
    try {
        planner::plan_detour(wall_req, wall);
    } catch (const Error& e) {
        wall_ok = e.code() == ErrorCode::PlanInfeasible;
    }
    c.require(wall_ok, "blocked corridor did not raise PlanInfeasible");
    c.note(std::to_string(feasible) + " of 20 scenes planned (" + std::to_string(infeasible) +
           " PlanInfeasible); min clearance planner " + format_number(worst_sampled) + " m, dense oracle " +
           format_number(worst_dense) + " m; joins gap " + format_number(worst_gap) + " m, angle " +
           format_number(worst_angle) + " rad");
    return c.verdict();
}

// 8. Metric closed forms and scaling identities.
Verdict metric_suite() {
    Check c;
    const double dt = 1e-3;
    auto series = [&](const std::function<double(double)>& f, double t_end) {
        metrics::ErrorSeries s;
        s.dt = dt;
        s.channel = "phi";
        const auto n = static_cast<std::size_t>(std::llround(t_end / dt));
        for (std::size_t i = 0; i <= n; ++i) {
            s.samples.push_back(f(dt * static_cast<double>(i)));
        }
        return s;
    };
    struct Case {
        std::function<double(double)> f;
        double iae, itae, itse;
    };
    // Window T = 1 s at dt = 1e-3; trapezoid error on t^5 is about 4e-7 here.
    const Case cases[] = {
        {[](double) { return 1.5; }, 1.5, 0.75, 1.125},
        {[](double t) { return t; }, 1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0},
        {[](double t) { return t * t; }, 1.0 / 3.0, 1.0 / 4.0, 1.0 / 6.0},
    };
    double worst = 0.0;
    for (const auto& k : cases) {
        const auto s = series(k.f, 1.0);
        worst = std::max({worst, std::abs(metrics::iae(s, 1.0) - k.iae), std::abs(metrics::itae(s, 1.0) - k.itae),
                          std::abs(metrics::itse(s, 1.0) - k.itse)});
    }
    c.require(worst <= 1e-6, "closed-form error " + format_number(worst));

    std::mt19937_64 rng(808);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> uc(-10.0, 10.0);
    double worst_rel = 0.0;
    for (int n = 0; n < 1000; ++n) {
        metrics::ErrorSeries e;
        e.dt = 0.01;
        e.channel = "x";
        for (int i = 0; i < 100; ++i) {
            e.samples.push_back(nd(rng));
        }
        const double k = uc(rng);
        auto s = e;
        for (auto& v : s.samples) {
            v *= k;
        }
        const double tp = 0.37;
        const double r1 = std::abs(metrics::iae(s, tp) - std::abs(k) * metrics::iae(e, tp)) / metrics::iae(s, tp);
        const double r2 = std::abs(metrics::itae(s, tp) - std::abs(k) * metrics::itae(e, tp)) / metrics::itae(s, tp);
        const double r3 = std::abs(metrics::itse(s, tp) - k * k * metrics::itse(e, tp)) / metrics::itse(s, tp);
        worst_rel = std::max({worst_rel, r1, r2, r3});
    }
    c.require(worst_rel <= 1e-13, "scaling identity relative error " + format_number(worst_rel));
    c.note("closed-form error " + format_number(worst) + ", scaling relative error " + format_number(worst_rel));
    return c.verdict();
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 9. Deterministic CSVs and pinned golden files.
Verdict determinism() {
    Check c;
    for (const auto& s : golden::kScenarios) {
        const auto a = golden::scenario_csv(kConfigDir, s);
        const auto b = golden::scenario_csv(kConfigDir, s);
        c.require(a == b, s + " CSV differs between runs");
        const auto path = kGoldenDir / (s + ".csv");
        c.require(std::filesystem::exists(path), "missing golden file " + path.string());
        const auto d = golden::compare(read_file(path), golden::decimate(a));
        c.require(d.ok, s + " golden mismatch: " + d.message);
    }
    c.note("step, storm, lissajous byte-identical across runs and match golden files");
    return c.verdict();
}

Verdict guarded(const std::function<Verdict()>& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        return {false, std::string("exception: ") + e.what()};
    }
}

} // namespace

int main() {
    int failures = 0;
    auto report = [&failures](int n, const std::string& name, const Verdict& v) {
        std::cout << (v.pass ? "PASS" : "FAIL") << " " << n << " " << name << ": " << v.detail << std::endl;
        failures += v.pass ? 0 : 1;
    };

    report(1, "gain law", guarded(gain_law));
    report(2, "degenerate equivalence", guarded(degenerate_equivalence));
    report(3, "dynamics oracles", guarded(dynamics_oracles));

    // Tuning runs twice: once for the comparisons, once more for trace determinism.
    std::optional<campaign::TuneOutcome> tuned;
    std::string trace_a, trace_b;
    double tune_secs = 0.0;
    std::string tune_error;
    try {
        const auto base = scenario_config(defaults_doc(), "step");
        const auto t0 = std::chrono::steady_clock::now();
        tuned = campaign::run_tune(base);
        tune_secs = seconds_since(t0);
        trace_a = all_traces(*tuned);
        trace_b = all_traces(campaign::run_tune(base));
    } catch (const std::exception& e) {
        tune_error = e.what();
    }

    report(4, "ES correctness", guarded([&] {
               if (!tuned) {
                   return Verdict{false, "tune failed: " + tune_error};
               }
               return es_correctness(trace_a, trace_b);
           }));
    report(5, "attitude step direction", guarded([&] {
               if (!tuned) {
                   return Verdict{false, "tune failed: " + tune_error};
               }
               return attitude_step(scenario_config(defaults_doc(), "step"), tuned->tuned, tune_secs);
           }));
    report(6, "lissajous direction", guarded([&] {
               if (!tuned) {
                   return Verdict{false, "tune failed: " + tune_error};
               }
               auto doc = defaults_doc();
               doc.merge_patch(tuned->fragment);
               return lissajous(scenario_config(defaults_doc(), "lissajous"), scenario_config(doc, "lissajous"));
           }));
    report(7, "planner", guarded(planner_scenes));
    report(8, "metrics", guarded(metric_suite));
    report(9, "determinism", guarded(determinism));
    return failures == 0 ? 0 : 1;
}
