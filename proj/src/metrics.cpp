#include "nlvg/metrics.hpp"

#include "nlvg/error.hpp"
#include "nlvg/format.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace nlvg::metrics {

double ErrorSeries::duration() const {
    return samples.empty() ? 0.0 : dt * static_cast<double>(samples.size() - 1);
}

void ErrorSeries::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw Error(ErrorCode::InvalidArgument, "error series needs dt > 0");
    }
    if (samples.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "error series needs at least two samples");
    }
    for (double v : samples) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFinite, "error series '" + channel + "' has a non-finite sample");
        }
    }
}

namespace {

using Integrand = std::function<double(double t, double e)>;

double windowed_mean(const ErrorSeries& s, double t_peak, const Integrand& f) {
    s.validate();
    if (!(t_peak > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "t_peak must be > 0");
    }
    // Allow t_peak to equal the duration up to rounding of the grid.
    const double slack = 1e-9 * s.dt;
    if (t_peak > s.duration() + slack) {
        throw Error(ErrorCode::WindowTooLong, "t_peak " + std::to_string(t_peak) +
                                                  " s exceeds series duration " +
                                                  std::to_string(s.duration()) + " s");
    }

    const double ratio = t_peak / s.dt;
    auto full = static_cast<std::size_t>(std::floor(ratio + 1e-9));
    full = std::min(full, s.samples.size() - 1);

    double sum = 0.0;
    for (std::size_t i = 0; i < full; ++i) {
        const double t0 = s.dt * static_cast<double>(i);
        const double t1 = s.dt * static_cast<double>(i + 1);
        sum += 0.5 * (f(t0, s.samples[i]) + f(t1, s.samples[i + 1])) * s.dt;
    }

    const double t_full = s.dt * static_cast<double>(full);
    const double rest = t_peak - t_full;
    if (rest > slack && full + 1 < s.samples.size()) {
        const double w = rest / s.dt;
        const double e_end = (1.0 - w) * s.samples[full] + w * s.samples[full + 1];
        sum += 0.5 * (f(t_full, s.samples[full]) + f(t_peak, e_end)) * rest;
    }
    return sum / t_peak;
}

} // namespace

double iae(const ErrorSeries& s, double t_peak) {
    return windowed_mean(s, t_peak, [](double, double e) { return std::abs(e); });
}

double itae(const ErrorSeries& s, double t_peak) {
    return windowed_mean(s, t_peak, [](double t, double e) { return t * std::abs(e); });
}

double itse(const ErrorSeries& s, double t_peak) {
    return windowed_mean(s, t_peak, [](double t, double e) { return t * e * e; });
}

ChannelMetrics evaluate(const ErrorSeries& series, double t_peak, std::string unit) {
    ChannelMetrics m;
    m.channel = series.channel;
    m.unit = std::move(unit);
    m.t_peak = t_peak;
    m.iae = iae(series, t_peak);
    m.itae = itae(series, t_peak);
    m.itse = itse(series, t_peak);
    return m;
}

const ComparisonRow& Comparison::row(const std::string& channel, const std::string& metric) const {
    for (const auto& r : rows) {
        if (r.channel == channel && r.metric == metric) {
            return r;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "no comparison row " + channel + "/" + metric);
}

double improvement_pct(double baseline, double candidate) {
    if (baseline == candidate) {
        return 0.0;
    }
    if (baseline == 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return (baseline - candidate) / baseline * 100.0;
}

Comparison compare(const MetricReport& a, const MetricReport& b) {
    if (a.channels.size() != b.channels.size()) {
        throw Error(ErrorCode::MismatchedChannels, "reports carry different channel counts");
    }
    Comparison cmp;
    cmp.baseline_label = a.controller;
    cmp.candidate_label = b.controller;
    for (std::size_t i = 0; i < a.channels.size(); ++i) {
        const auto& ca = a.channels[i];
        const auto& cb = b.channels[i];
        if (ca.channel != cb.channel || ca.t_peak != cb.t_peak) {
            throw Error(ErrorCode::MismatchedChannels,
                        "channel '" + ca.channel + "' does not line up with '" + cb.channel + "'");
        }
        cmp.rows.push_back({ca.channel, "IAE", ca.iae, cb.iae, improvement_pct(ca.iae, cb.iae)});
        cmp.rows.push_back({ca.channel, "ITAE", ca.itae, cb.itae, improvement_pct(ca.itae, cb.itae)});
        cmp.rows.push_back({ca.channel, "ITSE", ca.itse, cb.itse, improvement_pct(ca.itse, cb.itse)});
    }
    return cmp;
}

std::string format_table(const Comparison& cmp) {
    std::ostringstream os;
    os << pad_right("channel", 8) << pad_right("metric", 8) << pad_left(cmp.baseline_label, 16)
       << pad_left(cmp.candidate_label, 16) << pad_left("improvement %", 16) << '\n';
    for (const auto& r : cmp.rows) {
        os << pad_right(r.channel, 8) << pad_right(r.metric, 8) << pad_left(format_fixed(r.baseline, 6), 16)
           << pad_left(format_fixed(r.candidate, 6), 16) << pad_left(format_fixed(r.improvement_pct, 2), 16)
           << '\n';
    }
    return os.str();
}

std::string format_csv(const Comparison& cmp) {
    std::ostringstream os;
    os << "channel,metric,pid,nlvg,improvement_pct\n";
    for (const auto& r : cmp.rows) {
        os << r.channel << ',' << r.metric << ',' << format_number(r.baseline) << ','
           << format_number(r.candidate) << ',' << format_number(r.improvement_pct) << '\n';
    }
    return os.str();
}

} // namespace nlvg::metrics
