#include "nlvg/tuning.hpp"

#include "nlvg/error.hpp"
#include "nlvg/format.hpp"
#include "nlvg/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

namespace nlvg::tuning {

GainVector project(GainVector k) {
    for (std::size_t i = 0; i < 3; ++i) {
        k[i] = std::max(k[i], 0.0);
    }
    return k;
}

void EsConfig::validate() const {
    if (!(alpha > 0.0) || !(delta > 0.0) || restarts < 1 || max_iters < 0 || patience < 1 || !(tol >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "ES config needs alpha > 0, delta > 0, restarts >= 1");
    }
    for (const auto& [lo, hi] : init_range) {
        if (!(lo >= 0.0) || !(hi >= lo)) {
            throw Error(ErrorCode::InvalidArgument, "ES init range must satisfy 0 <= low <= high");
        }
    }
}

GradientEstimate grad_estimate(const GainVector& k, double delta, const CostFunction& cost) {
    if (!(delta > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "finite-difference delta must be > 0");
    }
    GradientEstimate g;
    double center = 0.0;
    bool have_center = false;
    for (std::size_t i = 0; i < 3; ++i) {
        GainVector plus = k;
        plus[i] += delta;
        if (k[i] - delta >= 0.0) {
            GainVector minus = k;
            minus[i] -= delta;
            g.grad[i] = (cost(plus) - cost(minus)) / (2.0 * delta);
        } else {
            if (!have_center) {
                center = cost(k);
                have_center = true;
            }
            g.grad[i] = (cost(plus) - center) / delta;
            g.one_sided[i] = true;
        }
    }
    return g;
}

DescentResult es_descend(const GainVector& start, const EsConfig& cfg, const CostFunction& cost) {
    cfg.validate();
    DescentResult res;
    GainVector k = project(start);
    double j = cost(k);
    res.best = k;
    res.best_cost = j;
    res.trace.push_back({0, k, j, j});

    int stable = 0;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const auto g = grad_estimate(k, cfg.delta, cost);
        GainVector next = k;
        for (std::size_t i = 0; i < 3; ++i) {
            next[i] -= cfg.alpha * g.grad[i];
        }
        next = project(next);
        const double j_next = cost(next);
        stable = std::abs(j_next - j) < cfg.tol ? stable + 1 : 0;
        k = next;
        j = j_next;
        if (j < res.best_cost) {
            res.best_cost = j;
            res.best = k;
        }
        res.trace.push_back({it, k, j, res.best_cost});
        if (stable >= cfg.patience) {
            res.converged = true;
            break;
        }
    }
    return res;
}

std::uint64_t child_seed(std::uint64_t master, int phase, int index) {
    // splitmix64 over (master, phase, index)
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(phase) * 1000003ULL +
                                                         static_cast<std::uint64_t>(index) + 1ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

GainVector random_start(const EsConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    GainVector k;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto [lo, hi] = cfg.init_range[i];
        k[i] = lo + (hi - lo) * unit_uniform(rng);
    }
    return k;
}

struct Campaign {
    DescentResult best;
    std::vector<TuneTraceRow> trace;
};

Campaign run_campaign(const EsConfig& cfg, const CostFunction& cost, int phase, const std::string& label) {
    std::vector<DescentResult> results(static_cast<std::size_t>(cfg.restarts));
    auto job = [&](int r) {
        return es_descend(random_start(cfg, child_seed(cfg.seed, phase, r)), cfg, cost);
    };
    if (cfg.parallel && cfg.restarts > 1) {
        std::vector<std::future<DescentResult>> futures;
        for (int r = 0; r < cfg.restarts; ++r) {
            futures.push_back(std::async(std::launch::async, job, r));
        }
        for (int r = 0; r < cfg.restarts; ++r) {
            results[static_cast<std::size_t>(r)] = futures[static_cast<std::size_t>(r)].get();
        }
    } else {
        for (int r = 0; r < cfg.restarts; ++r) {
            results[static_cast<std::size_t>(r)] = job(r);
        }
    }

    Campaign c;
    std::size_t winner = 0;
    for (std::size_t r = 0; r < results.size(); ++r) {
        if (results[r].best_cost < results[winner].best_cost) {
            winner = r;
        }
        for (const auto& p : results[r].trace) {
            c.trace.push_back({label, static_cast<int>(r), p.iter, p.k, p.cost});
        }
    }
    c.best = results[winner];
    return c;
}

} // namespace

control::ChannelGains TuneResult::channel_gains() const {
    return control::ChannelGains::nlvg(schedules[0], schedules[1], schedules[2]);
}

TuneResult tune_bounds(const EsConfig& cfg, const CostFunction& small_step_cost,
                       const CostFunction& large_step_cost, double delta1, double delta2) {
    cfg.validate();
    TuneResult out;
    Campaign lower = run_campaign(cfg, small_step_cost, 1, "K1");
    Campaign upper = run_campaign(cfg, large_step_cost, 2, "K2");
    out.k1 = lower.best.best;
    out.cost1 = lower.best.best_cost;
    out.k2 = upper.best.best;
    out.cost2 = upper.best.best_cost;
    out.trace = std::move(lower.trace);
    out.trace.insert(out.trace.end(), upper.trace.begin(), upper.trace.end());

    for (std::size_t i = 0; i < 3; ++i) {
        out.inverted[i] = out.k2[i] < out.k1[i];
        control::NlvgSchedule s;
        s.k1 = out.k1[i];
        s.amplitude = out.inverted[i] ? 0.0 : 0.5 * (out.k2[i] - out.k1[i]);
        s.delta1 = delta1;
        s.delta2 = delta2;
        s.validate();
        out.schedules[i] = s;
    }
    return out;
}

double mean_square_error(std::span<const double> e, double dt, double t0, double tf) {
    if (!(dt > 0.0) || !(t0 >= 0.0) || !(tf > t0)) {
        throw Error(ErrorCode::InvalidArgument, "cost window needs dt > 0 and 0 <= t0 < tf");
    }
    if (e.size() < 2 || dt * static_cast<double>(e.size() - 1) < tf - 1e-9 * dt) {
        throw Error(ErrorCode::WindowTooLong, "cost window extends past the error samples");
    }
    // Integrate e^2 over [t0, tf]; partial end intervals use linear interpolation of e.
    auto value_at = [&](double t) {
        const double pos = t / dt;
        const auto i = std::min(static_cast<std::size_t>(std::floor(pos)), e.size() - 2);
        const double w = pos - static_cast<double>(i);
        return (1.0 - w) * e[i] + w * e[i + 1];
    };
    auto first = static_cast<std::size_t>(std::ceil(t0 / dt - 1e-9));
    auto last = static_cast<std::size_t>(std::floor(tf / dt + 1e-9));
    last = std::min(last, e.size() - 1);

    double sum = 0.0;
    const double t_first = dt * static_cast<double>(first);
    const double t_last = dt * static_cast<double>(last);
    if (t_first > t0) {
        const double a = value_at(t0);
        sum += 0.5 * (a * a + e[first] * e[first]) * (t_first - t0);
    }
    for (std::size_t i = first; i < last; ++i) {
        sum += 0.5 * (e[i] * e[i] + e[i + 1] * e[i + 1]) * dt;
    }
    if (tf > t_last + 1e-9 * dt) {
        const double b = value_at(tf);
        sum += 0.5 * (e[last] * e[last] + b * b) * (tf - t_last);
    }
    return sum / (tf - t0);
}

void CostSpec::validate() const {
    if (!(t0 >= 0.0) || !(tf > t0) || !(dt > 0.0) || !(penalty >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "cost spec needs 0 <= t0 < tf and dt > 0");
    }
    if (normalize && amplitude == 0.0) {
        throw Error(ErrorCode::InvalidArgument, "normalized cost needs a non-zero step amplitude");
    }
}

namespace {

trajectory::StepChannel step_channel(control::Channel ch) {
    switch (ch) {
    case control::kX: return trajectory::StepChannel::X;
    case control::kY: return trajectory::StepChannel::Y;
    case control::kZ: return trajectory::StepChannel::Z;
    case control::kPhi: return trajectory::StepChannel::Phi;
    case control::kTheta: return trajectory::StepChannel::Theta;
    default: return trajectory::StepChannel::Psi;
    }
}

} // namespace

double evaluate_cost(const GainVector& k, const CostSpec& spec, const dynamics::QuadParams& plant,
                     const control::CascadeConfig& base) {
    spec.validate();
    sim::SimulationSetup setup;
    setup.plant = plant;
    setup.controller = base;
    for (auto ch : spec.apply_to) {
        setup.controller.gains[ch] = control::ChannelGains::fixed(k.kp, k.ki, k.kd);
    }
    setup.trajectory.shape = trajectory::StepSpec{step_channel(spec.channel), spec.amplitude, 0.0};
    setup.trajectory.duration = spec.tf;
    setup.dt = spec.dt;
    setup.t_total = spec.tf;

    sim::SimLog log;
    try {
        log = sim::run_simulation(setup);
    } catch (const Error& e) {
        if (spec.penalize_divergence) {
            return spec.penalty;
        }
        throw Error(ErrorCode::EpisodeDiverged, e.what());
    }
    std::vector<double> errors;
    errors.reserve(log.rows.size());
    const double scale = spec.normalize ? 1.0 / spec.amplitude : 1.0;
    for (const auto& r : log.rows) {
        errors.push_back(scale * r.errors[spec.channel]);
    }
    return mean_square_error(errors, spec.dt, spec.t0, spec.tf);
}

CostFunction make_cost(CostSpec spec, dynamics::QuadParams plant, control::CascadeConfig base) {
    return [spec = std::move(spec), plant, base = std::move(base)](const GainVector& k) {
        return evaluate_cost(k, spec, plant, base);
    };
}

std::string trace_csv(const std::vector<TuneTraceRow>& rows) {
    std::string out = "phase,restart,iter,kp,ki,kd,J\n";
    for (const auto& r : rows) {
        out += r.phase + ',' + std::to_string(r.restart) + ',' + std::to_string(r.iter) + ',' +
               format_number(r.k.kp) + ',' + format_number(r.k.ki) + ',' + format_number(r.k.kd) + ',' +
               format_number(r.cost) + '\n';
    }
    return out;
}

} // namespace nlvg::tuning
