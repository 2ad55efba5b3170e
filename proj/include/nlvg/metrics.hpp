#pragma once

#include <string>
#include <vector>

namespace nlvg::metrics {

/// Uniformly sampled error signal; samples[i] is the error at t = i*dt.
struct ErrorSeries {
    double dt{0.01};
    std::vector<double> samples;
    std::string channel;

    double duration() const;
    void validate() const;
};

// Each metric integrates over [0, t_peak] with the trapezoid rule on the
// series grid (linear interpolation inside the last partial interval) and
// divides by t_peak. WindowTooLong when t_peak exceeds the series.
double iae(const ErrorSeries& series, double t_peak);
double itae(const ErrorSeries& series, double t_peak);
double itse(const ErrorSeries& series, double t_peak);

struct ChannelMetrics {
    std::string channel;
    std::string unit;
    double t_peak{};
    double iae{}, itae{}, itse{};
};

struct MetricReport {
    std::string controller;
    std::vector<ChannelMetrics> channels;
};

ChannelMetrics evaluate(const ErrorSeries& series, double t_peak, std::string unit);

struct ComparisonRow {
    std::string channel;
    std::string metric;
    double baseline{};
    double candidate{};
    /// (baseline - candidate) / baseline * 100; positive means the candidate is better.
    double improvement_pct{};
};

struct Comparison {
    std::string baseline_label;
    std::string candidate_label;
    std::vector<ComparisonRow> rows;

    const ComparisonRow& row(const std::string& channel, const std::string& metric) const;
};

/// MismatchedChannels when the reports disagree on channels or windows.
Comparison compare(const MetricReport& baseline, const MetricReport& candidate);

double improvement_pct(double baseline, double candidate);

std::string format_table(const Comparison& cmp);
/// CSV with header `channel,metric,pid,nlvg,improvement_pct`.
std::string format_csv(const Comparison& cmp);

} // namespace nlvg::metrics
