#include "nlvg/simulation.hpp"

#include "nlvg/error.hpp"
#include "nlvg/format.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace nlvg::sim {

using control::Channel;

void SimulationSetup::validate() const {
    plant.validate();
    controller.validate();
    trajectory.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw Error(ErrorCode::InvalidArgument, "dt must be > 0");
    }
    if (!(t_total >= dt)) {
        throw Error(ErrorCode::InvalidArgument, "t_total must be >= dt");
    }
    if (!initial.finite()) {
        throw Error(ErrorCode::NonFinite, "initial state is not finite");
    }
}

std::size_t row_count(double t_total, double dt) {
    return static_cast<std::size_t>(std::floor(t_total / dt + 1e-9)) + 1;
}

namespace {

bool within_bounds(const dynamics::StateVector& s, double bound) {
    for (double v : s.to_array()) {
        if (!std::isfinite(v) || std::abs(v) > bound) {
            return false;
        }
    }
    return true;
}

} // namespace

SimLog run_simulation(const SimulationSetup& setup) {
    setup.validate();
    const std::size_t n = row_count(setup.t_total, setup.dt);

    SimLog log;
    log.dt = setup.dt;
    log.rows.reserve(n);

    dynamics::StateVector state = setup.initial;
    control::CascadeState channels{};
    trajectory::YawTracker yaw(setup.trajectory.yaw);

    for (std::size_t k = 0; k < n; ++k) {
        const double t = setup.dt * static_cast<double>(k);
        try {
            trajectory::ReferenceSample ref = setup.path ? planner::path_reference(*setup.path, t)
                                                         : trajectory::sample_reference(setup.trajectory, t);
            if (setup.trajectory.yaw == trajectory::YawMode::Tangent) {
                yaw.apply(ref);
            }
            const auto out = control::cascade_update(state, ref, setup.controller, setup.plant, channels, setup.dt);
            channels = out.channels;

            SimRow row;
            row.t = t;
            row.state = state;
            row.reference = ref;
            row.attitude_setpoint = out.attitude_setpoint;
            row.input = out.input;
            row.errors = out.errors;
            log.rows.push_back(row);

            if (k + 1 < n) {
                state = dynamics::step_rk4(state, out.input, setup.plant, setup.dt);
                if (!within_bounds(state, setup.divergence_bound)) {
                    throw Error(ErrorCode::SimulationDiverged, "state left the finite bound");
                }
            }
        } catch (const Error& e) {
            throw Error(ErrorCode::SimulationDiverged,
                        "step " + std::to_string(k) + " (t = " + format_fixed(t, 2) + " s): " + e.what());
        }
    }
    return log;
}

metrics::ErrorSeries SimLog::error_series(Channel channel, bool attitude_in_degrees) const {
    metrics::ErrorSeries s;
    s.dt = dt;
    s.channel = std::string(control::kChannelNames[channel]);
    const bool attitude = channel == control::kPhi || channel == control::kTheta || channel == control::kPsi;
    const double scale = attitude && attitude_in_degrees ? 180.0 / std::numbers::pi : 1.0;
    s.samples.reserve(rows.size());
    for (const auto& r : rows) {
        s.samples.push_back(scale * r.errors[channel]);
    }
    return s;
}

metrics::MetricReport report_metrics(const SimLog& log, const MetricWindows& windows, std::string label) {
    metrics::MetricReport report;
    report.controller = std::move(label);
    for (auto ch : {control::kPhi, control::kTheta}) {
        report.channels.push_back(metrics::evaluate(log.error_series(ch, true), windows.attitude, "deg"));
    }
    for (auto ch : {control::kX, control::kY}) {
        report.channels.push_back(metrics::evaluate(log.error_series(ch), windows.position, "m"));
    }
    return report;
}

std::string csv_header() {
    return "t,phi,theta,psi,phi_dot,theta_dot,psi_dot,x,y,z,x_dot,y_dot,z_dot,"
           "x_d,y_d,z_d,phi_d,theta_d,psi_d,"
           "ux,uy,thrust,tau_x,tau_y,tau_z,"
           "e_x,e_y,e_z,e_phi,e_theta,e_psi";
}

std::string to_csv(const SimLog& log) {
    std::string out = csv_header();
    out += '\n';
    out.reserve(log.rows.size() * 31 * 16);
    auto put = [&out](double v) {
        out += ',';
        out += format_number(v);
    };
    for (const auto& r : log.rows) {
        out += format_number(r.t);
        for (double v : r.state.to_array()) {
            put(v);
        }
        put(r.reference.x);
        put(r.reference.y);
        put(r.reference.z);
        put(r.attitude_setpoint.phi);
        put(r.attitude_setpoint.theta);
        put(r.reference.psi_d);
        put(r.input.ux);
        put(r.input.uy);
        put(r.input.thrust);
        put(r.input.tau_x);
        put(r.input.tau_y);
        put(r.input.tau_z);
        for (double e : r.errors) {
            put(e);
        }
        out += '\n';
    }
    return out;
}

} // namespace nlvg::sim
