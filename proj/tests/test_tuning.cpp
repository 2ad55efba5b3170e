#include "nlvg/error.hpp"
#include "nlvg/tuning.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

using namespace nlvg;
using namespace nlvg::tuning;

namespace {

double bowl(const GainVector& k, double a, double b, double c) {
    return (k.kp - a) * (k.kp - a) + (k.ki - b) * (k.ki - b) + (k.kd - c) * (k.kd - c);
}

EsConfig quiet_config() {
    EsConfig cfg;
    cfg.alpha = 0.1;
    cfg.tol = 1e-14;
    cfg.restarts = 3;
    cfg.max_iters = 200;
    cfg.init_range = {{{0.0, 5.0}, {0.0, 5.0}, {0.0, 5.0}}};
    return cfg;
}

} // namespace

TEST(Project, ClampsNegativeComponents) {
    EXPECT_EQ(project({-1.0, 2.0, -0.0}), (GainVector{0.0, 2.0, 0.0}));
    EXPECT_EQ(project({1.0, 2.0, 3.0}), (GainVector{1.0, 2.0, 3.0}));
}

TEST(GradEstimate, Examples) {
    const auto sq = grad_estimate({3.0, 1.0, 1.0}, 0.01, [](const GainVector& k) { return k.kp * k.kp; });
    EXPECT_NEAR(sq.grad[0], 6.0, 1e-9);
    EXPECT_NEAR(sq.grad[1], 0.0, 1e-12);

    const auto flat = grad_estimate({1.0, 1.0, 1.0}, 0.01, [](const GainVector&) { return 4.2; });
    for (double g : flat.grad) {
        EXPECT_EQ(g, 0.0);
    }

    const auto prod = grad_estimate({2.0, 5.0, 1.0}, 0.01, [](const GainVector& k) { return k.kp * k.ki; });
    EXPECT_NEAR(prod.grad[0], 5.0, 1e-9);
    EXPECT_NEAR(prod.grad[1], 2.0, 1e-9);
    EXPECT_NEAR(prod.grad[2], 0.0, 1e-9);
}

TEST(GradEstimate, SecondOrderAccuracy) {
    const auto f = [](const GainVector& k) { return std::exp(k.kp); };
    const double exact = std::exp(1.0);
    const double e1 = std::abs(grad_estimate({1.0, 1.0, 1.0}, 0.1, f).grad[0] - exact);
    const double e2 = std::abs(grad_estimate({1.0, 1.0, 1.0}, 0.01, f).grad[0] - exact);
    // Dividing delta by ten cuts the error by about 100.
    EXPECT_GT(e1 / e2, 50.0);
}

TEST(GradEstimate, OneSidedAtTheBoundary) {
    const auto g = grad_estimate({0.005, 1.0, 0.0}, 0.01, [](const GainVector& k) { return k.kp + 2.0 * k.kd; });
    EXPECT_TRUE(g.one_sided[0]);
    EXPECT_FALSE(g.one_sided[1]);
    EXPECT_TRUE(g.one_sided[2]);
    EXPECT_NEAR(g.grad[0], 1.0, 1e-12);
    EXPECT_NEAR(g.grad[2], 2.0, 1e-12);
    EXPECT_THROW(grad_estimate({1.0, 1.0, 1.0}, 0.0, [](const GainVector&) { return 0.0; }), Error);
}

TEST(EsDescend, ConvexBowlFromOrigin) {
    const auto cfg = quiet_config();
    const auto res = es_descend({0.0, 0.0, 0.0}, cfg, [](const GainVector& k) { return bowl(k, 2.0, 1.0, 0.0); });
    EXPECT_NEAR(res.best.kp, 2.0, 1e-3);
    EXPECT_NEAR(res.best.ki, 1.0, 1e-3);
    EXPECT_NEAR(res.best.kd, 0.0, 1e-3);
    EXPECT_LE(res.trace.back().iter, 200);
}

TEST(EsDescend, BestSoFarNeverIncreasesAndStaysFeasible) {
    EsConfig cfg = quiet_config();
    cfg.alpha = 0.9; // overshooting steps make the raw cost bounce
    const auto res = es_descend({4.0, 0.0, 3.0}, cfg, [](const GainVector& k) {
        return bowl(k, 1.0, 0.5, 0.2) + 0.3 * std::sin(5.0 * k.kp);
    });
    double prev = res.trace.front().best_cost;
    for (const auto& p : res.trace) {
        EXPECT_LE(p.best_cost, prev);
        EXPECT_LE(p.best_cost, p.cost);
        EXPECT_GE(p.k.kp, 0.0);
        EXPECT_GE(p.k.ki, 0.0);
        EXPECT_GE(p.k.kd, 0.0);
        prev = p.best_cost;
    }
}

TEST(EsDescend, StopsOnPlateau) {
    EsConfig cfg = quiet_config();
    cfg.tol = 1e-6;
    cfg.patience = 3;
    const auto res = es_descend({1.0, 1.0, 1.0}, cfg, [](const GainVector&) { return 1.0; });
    EXPECT_TRUE(res.converged);
    EXPECT_EQ(res.trace.back().iter, 3);
}

TEST(TuneBounds, FindsBothMinimaAndSetsAmplitude) {
    auto cfg = quiet_config();
    const auto r = tune_bounds(
        cfg, [](const GainVector& k) { return bowl(k, 1.0, 0.2, 0.5); },
        [](const GainVector& k) { return bowl(k, 3.0, 0.1, 1.5); }, 0.01, 0.838);
    EXPECT_NEAR(r.k1.kp, 1.0, 1e-3);
    EXPECT_NEAR(r.k2.kp, 3.0, 1e-3);
    EXPECT_NEAR(r.schedules[0].amplitude, 1.0, 1e-3);
    EXPECT_NEAR(r.schedules[2].amplitude, 0.5, 1e-3);
    // K2 < K1 on ki: inverted, amplitude forced to zero.
    EXPECT_TRUE(r.inverted[1]);
    EXPECT_EQ(r.schedules[1].amplitude, 0.0);
    EXPECT_EQ(r.schedules[1].k1, r.k1.ki);
    EXPECT_EQ(r.schedules[0].delta2, 0.838);
    // Every restart of both phases appears in the trace.
    std::set<std::pair<std::string, int>> runs;
    for (const auto& row : r.trace) {
        runs.insert({row.phase, row.restart});
    }
    EXPECT_EQ(runs.size(), 6u);
}

TEST(TuneBounds, DeterministicAcrossParallelism) {
    auto cfg = quiet_config();
    const auto f1 = [](const GainVector& k) { return bowl(k, 1.0, 0.2, 0.5) + 0.1 * std::cos(3.0 * k.kd); };
    const auto f2 = [](const GainVector& k) { return bowl(k, 3.0, 0.3, 1.5); };
    const auto a = tune_bounds(cfg, f1, f2, 0.01, 0.838);
    const auto b = tune_bounds(cfg, f1, f2, 0.01, 0.838);
    cfg.parallel = false;
    const auto c = tune_bounds(cfg, f1, f2, 0.01, 0.838);
    EXPECT_EQ(trace_csv(a.trace), trace_csv(b.trace));
    EXPECT_EQ(trace_csv(a.trace), trace_csv(c.trace));
    EXPECT_EQ(a.schedules, c.schedules);
    cfg.seed = 2;
    const auto d = tune_bounds(cfg, f1, f2, 0.01, 0.838);
    EXPECT_NE(trace_csv(a.trace), trace_csv(d.trace));
}

TEST(TuneBounds, StartsDrawnFromInitRange) {
    auto cfg = quiet_config();
    cfg.restarts = 8;
    cfg.max_iters = 0;
    cfg.init_range = {{{2.0, 3.0}, {0.0, 0.0}, {5.0, 6.0}}};
    const auto r = tune_bounds(cfg, [](const GainVector&) { return 0.0; }, [](const GainVector&) { return 0.0; },
                               0.01, 0.838);
    ASSERT_EQ(r.trace.size(), 16u);
    for (const auto& row : r.trace) {
        EXPECT_GE(row.k.kp, 2.0);
        EXPECT_LE(row.k.kp, 3.0);
        EXPECT_EQ(row.k.ki, 0.0);
        EXPECT_GE(row.k.kd, 5.0);
        EXPECT_LE(row.k.kd, 6.0);
    }
}

TEST(TuneBounds, TiesGoToLowestRestart) {
    auto cfg = quiet_config();
    cfg.max_iters = 0;
    const auto r = tune_bounds(cfg, [](const GainVector&) { return 1.0; }, [](const GainVector&) { return 1.0; },
                               0.01, 0.838);
    EXPECT_EQ(r.k1, r.trace.front().k);
}

TEST(ChildSeed, DistinctAndStable) {
    std::set<std::uint64_t> seen;
    for (int phase = 0; phase < 3; ++phase) {
        for (int i = 0; i < 50; ++i) {
            seen.insert(child_seed(1, phase, i));
        }
    }
    EXPECT_EQ(seen.size(), 150u);
    EXPECT_EQ(child_seed(7, 1, 3), child_seed(7, 1, 3));
    EXPECT_NE(child_seed(7, 1, 3), child_seed(8, 1, 3));
}

TEST(MeanSquareError, Examples) {
    const std::vector<double> zero(301, 0.0);
    EXPECT_EQ(mean_square_error(zero, 0.01, 0.0, 3.0), 0.0);
    const std::vector<double> one(301, 1.0);
    EXPECT_NEAR(mean_square_error(one, 0.01, 0.0, 3.0), 1.0, 1e-12);
    EXPECT_NEAR(mean_square_error(one, 0.01, 0.005, 2.995), 1.0, 1e-12);
    std::vector<double> ramp;
    for (int i = 0; i <= 1000; ++i) {
        ramp.push_back(i * 1e-3);
    }
    EXPECT_NEAR(mean_square_error(ramp, 1e-3, 0.0, 1.0), 1.0 / 3.0, 1e-6);
    // Window [0.5, 1]: (1/0.5) * (1 - 1/8) / 3
    EXPECT_NEAR(mean_square_error(ramp, 1e-3, 0.5, 1.0), 7.0 / 12.0, 1e-6);
    EXPECT_THROW(mean_square_error(one, 0.01, 0.0, 4.0), Error);
    EXPECT_THROW(mean_square_error(one, 0.01, 1.0, 1.0), Error);
}

TEST(EvaluateCost, NonNegativeAndUnactuatedChannelCostsOne) {
    const dynamics::QuadParams plant;
    const auto base = control::CascadeConfig::baseline_gains();
    CostSpec spec;
    spec.tf = 1.0;
    for (double kp : {0.5, 4.0, 12.0}) {
        EXPECT_GE(evaluate_cost({kp, 0.1, 2.0}, spec, plant, base), 0.0);
    }
    // Normalized error of an un-actuated channel stays at the step size.
    EXPECT_NEAR(evaluate_cost({0.0, 0.0, 0.0}, spec, plant, base), 1.0, 1e-9);
}

TEST(EvaluateCost, BetterGainsCostLess) {
    const dynamics::QuadParams plant;
    const auto base = control::CascadeConfig::baseline_gains();
    CostSpec spec;
    spec.tf = 2.0;
    EXPECT_LT(evaluate_cost({8.0, 0.1, 5.0}, spec, plant, base), evaluate_cost({0.5, 0.0, 0.5}, spec, plant, base));
}

TEST(EvaluateCost, DivergencePenaltyOrError) {
    dynamics::QuadParams plant;
    plant.torque_max = 1e9;
    const auto base = control::CascadeConfig::baseline_gains();
    CostSpec spec;
    spec.tf = 2.0;
    spec.amplitude = 0.5;
    const GainVector wild{1e6, 0.0, 0.0};
    EXPECT_EQ(evaluate_cost(wild, spec, plant, base), spec.penalty);
    spec.penalize_divergence = false;
    try {
        evaluate_cost(wild, spec, plant, base);
        FAIL() << "expected EpisodeDiverged";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EpisodeDiverged);
    }
}

TEST(EvaluateCost, Deterministic) {
    const dynamics::QuadParams plant;
    const auto base = control::CascadeConfig::baseline_gains();
    CostSpec spec;
    spec.apply_to = {control::kPhi, control::kTheta};
    const auto f = make_cost(spec, plant, base);
    EXPECT_EQ(f({6.0, 0.2, 3.0}), f({6.0, 0.2, 3.0}));
}

TEST(Validation, RejectsBadConfigs) {
    EsConfig cfg;
    cfg.alpha = 0.0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = EsConfig{};
    cfg.restarts = 0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = EsConfig{};
    cfg.init_range[0] = {3.0, 1.0};
    EXPECT_THROW(cfg.validate(), Error);
    CostSpec spec;
    spec.amplitude = 0.0;
    EXPECT_THROW(spec.validate(), Error);
}

TEST(TraceCsv, Layout) {
    const std::vector<TuneTraceRow> rows{{"K1", 0, 3, {1.0, 0.5, 2.0}, 0.25}};
    EXPECT_EQ(trace_csv(rows), "phase,restart,iter,kp,ki,kd,J\n"
                               "K1,0,3,1.00000000e+00,5.00000000e-01,2.00000000e+00,2.50000000e-01\n");
}
