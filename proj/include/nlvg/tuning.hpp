#pragma once

#include "nlvg/control.hpp"
#include "nlvg/dynamics.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nlvg::tuning {

struct GainVector {
    double kp{}, ki{}, kd{};

    double& operator[](std::size_t i) { return i == 0 ? kp : (i == 1 ? ki : kd); }
    double operator[](std::size_t i) const { return i == 0 ? kp : (i == 1 ? ki : kd); }
    bool operator==(const GainVector&) const = default;
};

/// Componentwise clamp to the nonnegative orthant.
GainVector project(GainVector k);

using CostFunction = std::function<double(const GainVector&)>;

struct EsConfig {
    double alpha{0.05};
    double delta{0.01};
    int max_iters{200};
    int restarts{5};
    std::uint64_t seed{1};
    std::array<std::pair<double, double>, 3> init_range{{{0.0, 20.0}, {0.0, 1.0}, {0.0, 10.0}}};
    /// Stop once |dJ| < tol for `patience` consecutive iterations.
    double tol{1e-6};
    int patience{5};
    bool parallel{true};

    void validate() const;
};

struct GradientEstimate {
    std::array<double, 3> grad{};
    /// Components where K - delta would leave the orthant and a forward difference was used.
    std::array<bool, 3> one_sided{};
};

/// Central difference (J(K + d e_k) - J(K - d e_k)) / (2 d) per gain.
GradientEstimate grad_estimate(const GainVector& k, double delta, const CostFunction& cost);

struct TracePoint {
    int iter{};
    GainVector k{};
    double cost{};
    double best_cost{};
};

struct DescentResult {
    GainVector best{};
    double best_cost{};
    std::vector<TracePoint> trace;
    bool converged{false};
};

/// K <- project(K - alpha * grad J(K)) until max_iters or the |dJ| plateau.
DescentResult es_descend(const GainVector& start, const EsConfig& cfg, const CostFunction& cost);

struct TuneTraceRow {
    std::string phase; ///< "K1" or "K2"
    int restart{};
    int iter{};
    GainVector k{};
    double cost{};
};

struct TuneResult {
    GainVector k1{}, k2{};
    double cost1{}, cost2{};
    /// Schedules for kp, ki, kd with A = max(0, (K2 - K1) / 2).
    std::array<control::NlvgSchedule, 3> schedules{};
    /// Components where K2 < K1 (their amplitude is forced to 0).
    std::array<bool, 3> inverted{};
    std::vector<TuneTraceRow> trace;

    control::ChannelGains channel_gains() const;
};

/// Seed for restart `index` of phase `phase`, derived from the master seed.
std::uint64_t child_seed(std::uint64_t master, int phase, int index);

/// Two ES campaigns (small-step cost -> K1, large-step cost -> K2), each with
/// `restarts` seeded random starts; lowest cost wins, ties to the lowest index.
TuneResult tune_bounds(const EsConfig& cfg, const CostFunction& small_step_cost,
                       const CostFunction& large_step_cost, double delta1, double delta2);

/// Trapezoidal mean of e^2 over [t0, tf] on a uniform grid starting at t = 0.
double mean_square_error(std::span<const double> errors, double dt, double t0, double tf);

/// Episode description for simulation-backed costs.
struct CostSpec {
    double t0{0.0};
    double tf{3.0};
    control::Channel channel{control::kPhi};
    double amplitude{0.05};
    /// Channels that receive the candidate gains (the stepped one at least).
    std::vector<control::Channel> apply_to{control::kPhi};
    /// Divide e by the step amplitude so J is dimensionless.
    bool normalize{true};
    bool penalize_divergence{true};
    double penalty{1e6};
    double dt{0.01};

    void validate() const;
};

/// J(K) for fixed gains K on a step episode of spec.channel. Diverging
/// episodes cost `penalty`, or throw EpisodeDiverged when not penalized.
double evaluate_cost(const GainVector& k, const CostSpec& spec, const dynamics::QuadParams& plant,
                     const control::CascadeConfig& base);

CostFunction make_cost(CostSpec spec, dynamics::QuadParams plant, control::CascadeConfig base);

std::string trace_csv(const std::vector<TuneTraceRow>& rows);

} // namespace nlvg::tuning
