#include "nlvg/config.hpp"

#include "nlvg/error.hpp"

#include <fstream>
#include <set>

namespace nlvg::config {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

/// Object reader that remembers which keys were consumed; finish() rejects the rest.
class Section {
public:
    Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            fail(path_ + " must be an object");
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) {
            return fallback;
        }
        const Json& v = j_.at(key);
        if (!v.is_number()) {
            fail(where(key) + " must be a number");
        }
        return v.get<double>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) {
            return fallback;
        }
        const Json& v = j_.at(key);
        if (!v.is_boolean()) {
            fail(where(key) + " must be true or false");
        }
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key)) {
            return fallback;
        }
        const Json& v = j_.at(key);
        if (!v.is_string()) {
            fail(where(key) + " must be a string");
        }
        return v.get<std::string>();
    }

    std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) {
            return fallback;
        }
        const Json& v = j_.at(key);
        // Documents built in code store small ints as signed.
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            fail(where(key) + " must be a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    template <std::size_t N>
    std::array<double, N> triple(const std::string& key, std::array<double, N> fallback) {
        if (!has(key)) {
            return fallback;
        }
        const Json& v = j_.at(key);
        if (!v.is_array() || v.size() != N) {
            fail(where(key) + " must be an array of " + std::to_string(N) + " numbers");
        }
        std::array<double, N> out{};
        for (std::size_t i = 0; i < N; ++i) {
            if (!v[i].is_number()) {
                fail(where(key) + " must contain numbers only");
            }
            out[i] = v[i].get<double>();
        }
        return out;
    }

    const Json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    Section child(const std::string& key) { return Section(raw(key), where(key)); }

    std::string where(const std::string& key) const { return path_ + "." + key; }

    void finish() const {
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.contains(key)) {
                fail("unknown key '" + where(key) + "'");
            }
        }
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

control::Channel channel_from_string(const std::string& name) {
    for (std::size_t i = 0; i < control::kChannelCount; ++i) {
        if (control::kChannelNames[i] == name) {
            return static_cast<control::Channel>(i);
        }
    }
    fail("unknown channel '" + name + "'");
}

dynamics::QuadParams parse_plant(Section s) {
    dynamics::QuadParams p;
    p.mass = s.number("mass", p.mass);
    const auto inertia = s.triple<3>("inertia", {p.ixx, p.iyy, p.izz});
    p.ixx = inertia[0];
    p.iyy = inertia[1];
    p.izz = inertia[2];
    p.gravity = s.number("gravity", p.gravity);
    const auto drag = s.triple<3>("drag", {p.drag_x, p.drag_y, p.drag_z});
    p.drag_x = drag[0];
    p.drag_y = drag[1];
    p.drag_z = drag[2];
    p.thrust_max = s.number("thrust_max", 4.0 * p.mass * p.gravity);
    p.torque_max = s.number("torque_max", p.torque_max);
    s.finish();
    return p;
}

control::NlvgSchedule parse_schedule(Section s) {
    control::NlvgSchedule sched;
    sched.k1 = s.number("k1", sched.k1);
    sched.amplitude = s.number("amplitude", sched.amplitude);
    sched.delta1 = s.number("delta1", sched.delta1);
    sched.delta2 = s.number("delta2", sched.delta2);
    s.finish();
    return sched;
}

void parse_controller(Section s, RunConfig& cfg) {
    const std::string mode = s.string("mode", "pid");
    if (mode == "pid") {
        cfg.mode = ControllerMode::Pid;
    } else if (mode == "nlvg") {
        cfg.mode = ControllerMode::Nlvg;
    } else {
        fail("controller.mode must be 'pid' or 'nlvg'");
    }
    const std::string signals = s.string("schedule_signals", "paper");
    if (signals == "paper") {
        cfg.controller.options.signals = control::ScheduleSignals::Crossed;
    } else if (signals == "matched") {
        cfg.controller.options.signals = control::ScheduleSignals::Matched;
    } else {
        fail("controller.schedule_signals must be 'paper' or 'matched'");
    }
    cfg.controller.options.integral_limit = s.number("integral_limit", cfg.controller.options.integral_limit);
    cfg.controller.attitude_limit = s.number("attitude_limit", cfg.controller.attitude_limit);

    if (s.has("gains")) {
        Section g = s.child("gains");
        for (std::size_t i = 0; i < control::kChannelCount; ++i) {
            const std::string name(control::kChannelNames[i]);
            const auto& cur = cfg.controller.gains[i];
            const auto k = g.triple<3>(name, {cur.kp, cur.ki, cur.kd});
            cfg.controller.gains[i] = control::ChannelGains::fixed(k[0], k[1], k[2]);
        }
        g.finish();
    }

    std::array<std::optional<control::ChannelGains>, control::kChannelCount> scheduled{};
    if (s.has("nlvg")) {
        Section n = s.child("nlvg");
        for (std::size_t i = 0; i < control::kChannelCount; ++i) {
            const std::string name(control::kChannelNames[i]);
            if (!n.has(name)) {
                continue;
            }
            Section ch = n.child(name);
            const auto p = parse_schedule(ch.child("kp"));
            const auto in = parse_schedule(ch.child("ki"));
            const auto d = parse_schedule(ch.child("kd"));
            ch.finish();
            scheduled[i] = control::ChannelGains::nlvg(p, in, d);
        }
        n.finish();
    }
    s.finish();

    if (cfg.mode == ControllerMode::Nlvg) {
        for (std::size_t i = 0; i < control::kChannelCount; ++i) {
            if (scheduled[i]) {
                cfg.controller.gains[i] = *scheduled[i];
                continue;
            }
            // Unscheduled channels run as NLVG with zero amplitude (fixed-gain equivalent).
            const auto& f = cfg.controller.gains[i];
            control::NlvgSchedule p, in, d;
            p.k1 = f.kp;
            in.k1 = f.ki;
            d.k1 = f.kd;
            cfg.controller.gains[i] = control::ChannelGains::nlvg(p, in, d);
        }
    }
}

void parse_trajectory(Section s, RunConfig& cfg) {
    const std::string type = s.string("type", "storm");
    cfg.trajectory.yaw = trajectory::yaw_mode_from_string(s.string("yaw", "zero"));

    trajectory::StepSpec step;
    if (s.has("step")) {
        Section t = s.child("step");
        step.channel = trajectory::step_channel_from_string(t.string("channel", "attitude"));
        step.amplitude = t.number("amplitude", step.amplitude);
        step.t_start = t.number("t_start", step.t_start);
        t.finish();
    }
    trajectory::StormSpec storm;
    if (s.has("storm")) {
        Section t = s.child("storm");
        storm.r0 = t.number("r0", storm.r0);
        storm.radial_rate = t.number("radial_rate", storm.radial_rate);
        storm.omega = t.number("omega", storm.omega);
        storm.z0 = t.number("z0", storm.z0);
        storm.climb_rate = t.number("climb_rate", storm.climb_rate);
        storm.t_takeoff = t.number("t_takeoff", storm.t_takeoff);
        storm.ramp_time = t.number("ramp_time", storm.ramp_time);
        t.finish();
    }
    trajectory::LissajousSpec liss;
    if (s.has("lissajous")) {
        Section t = s.child("lissajous");
        liss.ax = t.number("ax", liss.ax);
        liss.ay = t.number("ay", liss.ay);
        liss.az = t.number("az", liss.az);
        liss.a = t.number("a", liss.a);
        liss.b = t.number("b", liss.b);
        liss.c = t.number("c", liss.c);
        liss.phase = t.number("phase", liss.phase);
        liss.omega = t.number("omega", liss.omega);
        liss.z0 = t.number("z0", liss.z0);
        liss.ramp_time = t.number("ramp_time", liss.ramp_time);
        t.finish();
    }
    s.finish();

    if (type == "step") {
        cfg.trajectory.shape = step;
    } else if (type == "storm") {
        cfg.trajectory.shape = storm;
    } else if (type == "lissajous") {
        cfg.trajectory.shape = liss;
    } else {
        fail("trajectory.type must be step, storm or lissajous");
    }
}

void parse_simulation(Section s, RunConfig& cfg) {
    cfg.dt = s.number("dt", cfg.dt);
    cfg.t_total = s.number("t_total", cfg.t_total);
    if (s.has("initial_state")) {
        Section init = s.child("initial_state");
        auto& st = cfg.initial;
        st.phi = init.number("phi", st.phi);
        st.theta = init.number("theta", st.theta);
        st.psi = init.number("psi", st.psi);
        st.phi_dot = init.number("phi_dot", st.phi_dot);
        st.theta_dot = init.number("theta_dot", st.theta_dot);
        st.psi_dot = init.number("psi_dot", st.psi_dot);
        st.x = init.number("x", st.x);
        st.y = init.number("y", st.y);
        st.z = init.number("z", st.z);
        st.x_dot = init.number("x_dot", st.x_dot);
        st.y_dot = init.number("y_dot", st.y_dot);
        st.z_dot = init.number("z_dot", st.z_dot);
        init.finish();
    }
    s.finish();
}

void parse_metrics(Section s, RunConfig& cfg) {
    cfg.peak_windows.attitude = s.number("t_peak_attitude", cfg.peak_windows.attitude);
    cfg.peak_windows.position = s.number("t_peak_position", cfg.peak_windows.position);
    if (s.has("path_window")) {
        const Json& v = s.raw("path_window");
        if (v.is_string() && v.get<std::string>() == "full") {
            cfg.path_window.reset();
        } else if (v.is_number()) {
            cfg.path_window = v.get<double>();
        } else {
            fail("metrics.path_window must be \"full\" or a number");
        }
    }
    s.finish();
}

TuningGroup parse_group(Section s) {
    TuningGroup g;
    g.name = s.string("name", "group");
    g.step_channel = channel_from_string(s.string("step_channel", "phi"));
    if (s.has("apply_to")) {
        const Json& list = s.raw("apply_to");
        if (!list.is_array() || list.empty()) {
            fail(s.where("apply_to") + " must be a non-empty array of channel names");
        }
        g.apply_to.clear();
        for (const auto& item : list) {
            if (!item.is_string()) {
                fail(s.where("apply_to") + " must contain channel names");
            }
            g.apply_to.push_back(channel_from_string(item.get<std::string>()));
        }
    } else {
        g.apply_to = {g.step_channel};
    }
    g.small_amplitude = s.number("small_amplitude", g.small_amplitude);
    g.large_amplitude = s.number("large_amplitude", g.large_amplitude);
    g.t0 = s.number("t0", g.t0);
    g.tf = s.number("tf", g.tf);
    if (s.has("init_range")) {
        Section r = s.child("init_range");
        const char* names[] = {"kp", "ki", "kd"};
        for (std::size_t i = 0; i < 3; ++i) {
            const auto range = r.triple<2>(names[i], {g.init_range[i].first, g.init_range[i].second});
            g.init_range[i] = {range[0], range[1]};
        }
        r.finish();
    }
    s.finish();
    return g;
}

void parse_tuning(Section s, RunConfig& cfg) {
    auto& t = cfg.tuning;
    t.es.alpha = s.number("alpha", t.es.alpha);
    t.es.delta = s.number("delta", t.es.delta);
    t.es.max_iters = static_cast<int>(s.unsigned_int("max_iters", static_cast<std::uint64_t>(t.es.max_iters)));
    t.es.restarts = static_cast<int>(s.unsigned_int("restarts", static_cast<std::uint64_t>(t.es.restarts)));
    t.es.tol = s.number("tol", t.es.tol);
    t.es.patience = static_cast<int>(s.unsigned_int("patience", static_cast<std::uint64_t>(t.es.patience)));
    t.es.parallel = s.boolean("parallel", t.es.parallel);
    t.delta1 = s.number("delta1", t.delta1);
    t.delta2 = s.number("delta2", t.delta2);
    t.penalty = s.number("penalty", t.penalty);
    const std::string cost = s.string("cost", "simulation");
    if (cost == "simulation") {
        t.cost = CostMode::Simulation;
    } else if (cost == "synthetic") {
        t.cost = CostMode::Synthetic;
    } else {
        fail("tuning.cost must be 'simulation' or 'synthetic'");
    }
    if (s.has("groups")) {
        const Json& list = s.raw("groups");
        if (!list.is_array()) {
            fail("tuning.groups must be an array");
        }
        t.groups.clear();
        for (std::size_t i = 0; i < list.size(); ++i) {
            t.groups.push_back(parse_group(Section(list[i], "tuning.groups[" + std::to_string(i) + "]")));
        }
    }
    s.finish();
}

Json read_json(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        fail("cannot open '" + file.string() + "'");
    }
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        fail("'" + file.string() + "' is not valid JSON: " + e.what());
    }
}

planner::Vec3 vec3(const Json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) {
        fail(where + " must be [x, y, z]");
    }
    planner::Vec3 out;
    for (int i = 0; i < 3; ++i) {
        if (!v[static_cast<std::size_t>(i)].is_number()) {
            fail(where + " must contain numbers");
        }
        out[i] = v[static_cast<std::size_t>(i)].get<double>();
    }
    return out;
}

Json vec3_json(const planner::Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json schedule_json(const control::NlvgSchedule& s) {
    return {{"k1", s.k1}, {"amplitude", s.amplitude}, {"delta1", s.delta1}, {"delta2", s.delta2}};
}

} // namespace

Json load_documents(const std::vector<std::filesystem::path>& files) {
    if (files.empty()) {
        fail("no configuration file given");
    }
    Json merged = Json::object();
    for (const auto& file : files) {
        Json doc = read_json(file);
        if (!doc.is_object()) {
            fail("'" + file.string() + "' must hold a JSON object");
        }
        if (doc.contains("scene") && doc["scene"].is_string()) {
            std::filesystem::path scene = doc["scene"].get<std::string>();
            if (scene.is_relative()) {
                doc["scene"] = (file.parent_path() / scene).lexically_normal().string();
            }
        }
        merged.merge_patch(doc);
    }
    return merged;
}

void select_scenario(Json& doc, const std::string& scenario) {
    if (scenario != "step" && scenario != "storm" && scenario != "lissajous") {
        fail("scenario must be step, storm or lissajous");
    }
    doc["trajectory"]["type"] = scenario;
}

RunConfig parse(const Json& doc) {
    RunConfig cfg;
    cfg.document = doc;
    Section root(doc, "config");
    if (root.has("plant")) {
        cfg.plant = parse_plant(root.child("plant"));
    }
    if (root.has("controller")) {
        parse_controller(root.child("controller"), cfg);
    }
    if (root.has("trajectory")) {
        parse_trajectory(root.child("trajectory"), cfg);
    }
    if (root.has("simulation")) {
        parse_simulation(root.child("simulation"), cfg);
    }
    if (root.has("metrics")) {
        parse_metrics(root.child("metrics"), cfg);
    }
    if (root.has("tuning")) {
        parse_tuning(root.child("tuning"), cfg);
    }
    if (root.has("scene")) {
        cfg.scene = load_scene(root.string("scene", ""));
    }
    cfg.seed = root.unsigned_int("seed", cfg.seed);
    cfg.output = root.string("output", cfg.output.string());
    root.finish();
    cfg.trajectory.duration = cfg.t_total;
    cfg.tuning.es.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    try {
        plant.validate();
        controller.validate();
        trajectory.validate();
        tuning.es.validate();
        for (const auto& g : tuning.groups) {
            if (!(g.tf > g.t0) || !(g.t0 >= 0.0) || g.small_amplitude == 0.0 || g.large_amplitude == 0.0) {
                throw Error(ErrorCode::InvalidArgument, "tuning group '" + g.name + "' has an invalid window or amplitude");
            }
        }
    } catch (const Error& e) {
        fail(e.what());
    }
    if (!(dt > 0.0) || !(t_total >= dt)) {
        fail("simulation needs dt > 0 and t_total >= dt");
    }
    if (!(peak_windows.attitude > 0.0) || !(peak_windows.position > 0.0) || (path_window && !(*path_window > 0.0))) {
        fail("metric windows must be > 0");
    }
}

sim::SimulationSetup RunConfig::simulation_setup() const {
    sim::SimulationSetup s;
    s.plant = plant;
    s.controller = controller;
    s.trajectory = trajectory;
    s.initial = initial;
    s.dt = dt;
    s.t_total = t_total;
    if (scene) {
        s.path = planner::plan_detour(scene->request, scene->obstacles);
    }
    return s;
}

sim::MetricWindows RunConfig::metric_windows() const {
    const bool is_step = std::holds_alternative<trajectory::StepSpec>(trajectory.shape) && !scene;
    if (is_step) {
        return peak_windows;
    }
    const double w = path_window.value_or(dt * static_cast<double>(sim::row_count(t_total, dt) - 1));
    return {w, w};
}

std::string RunConfig::controller_label() const { return mode == ControllerMode::Pid ? "pid" : "nlvg"; }

Scene parse_scene(const Json& doc) {
    Scene scene;
    Section s(doc, "scene");
    auto& req = scene.request;
    if (s.has("waypoints")) {
        const Json& list = s.raw("waypoints");
        if (!list.is_array()) {
            fail("scene.waypoints must be an array");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            req.waypoints.push_back(vec3(list[i], "scene.waypoints[" + std::to_string(i) + "]"));
        }
    }
    if (s.has("obstacles")) {
        const Json& list = s.raw("obstacles");
        if (!list.is_array()) {
            fail("scene.obstacles must be an array");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            Section o(list[i], "scene.obstacles[" + std::to_string(i) + "]");
            planner::ObstacleSphere sphere;
            sphere.id = o.string("id", "obstacle" + std::to_string(i));
            sphere.center = vec3(o.raw("center"), o.where("center"));
            sphere.r_safe = o.number("r_safe", sphere.r_safe);
            o.finish();
            scene.obstacles.push_back(sphere);
        }
    }
    if (s.has("corridor")) {
        Section c = s.child("corridor");
        req.z_min = c.number("z_min", req.z_min);
        req.z_max = c.number("z_max", req.z_max);
        c.finish();
    }
    req.v_max = s.number("v_max", req.v_max);
    req.a_max = s.number("a_max", req.a_max);
    req.sample_dt = s.number("sample_dt", req.sample_dt);
    if (s.has("planner")) {
        Section p = s.child("planner");
        auto& o = req.options;
        o.standoff_factor = p.number("standoff_factor", o.standoff_factor);
        o.margin = p.number("margin", o.margin);
        o.inflation = p.number("inflation", o.inflation);
        o.max_inflations = static_cast<int>(p.unsigned_int("max_inflations", static_cast<std::uint64_t>(o.max_inflations)));
        o.clearance_step = p.number("clearance_step", o.clearance_step);
        o.min_duration = p.number("min_duration", o.min_duration);
        p.finish();
    }
    s.finish();
    try {
        req.validate();
    } catch (const Error& e) {
        fail(e.what());
    }
    return scene;
}

Scene load_scene(const std::filesystem::path& file) { return parse_scene(read_json(file)); }

Json nlvg_fragment(const std::vector<std::pair<control::Channel, control::ChannelGains>>& channels,
                   control::ScheduleSignals signals) {
    Json nlvg = Json::object();
    for (const auto& [ch, g] : channels) {
        nlvg[std::string(control::kChannelNames[ch])] = {
            {"kp", schedule_json(g.sched_p)}, {"ki", schedule_json(g.sched_i)}, {"kd", schedule_json(g.sched_d)}};
    }
    return {{"controller",
             {{"mode", "nlvg"},
              {"schedule_signals", signals == control::ScheduleSignals::Crossed ? "paper" : "matched"},
              {"nlvg", nlvg}}}};
}

Json path_to_json(const planner::PlannedPath& path) {
    Json segs = Json::array();
    for (std::size_t i = 0; i < path.segments.size(); ++i) {
        const auto& s = path.segments[i];
        Json ctrl = Json::array();
        for (const auto& p : s.ctrl) {
            ctrl.push_back(vec3_json(p));
        }
        segs.push_back({{"control_points", ctrl},
                        {"duration", s.duration},
                        {"role", path.roles[i] == planner::SegmentRole::Leg ? "leg" : "detour"}});
    }
    return {{"segments", segs},
            {"total_duration", path.total_duration()},
            {"min_clearance_margin", path.clearance.empty() ? Json(nullptr) : Json(path.min_clearance_margin)},
            {"velocity_ok", path.velocity_ok},
            {"acceleration_ok", path.acceleration_ok},
            {"corridor_ok", path.corridor_ok},
            {"lateral_fallback", path.lateral_fallback},
            {"final_margin", path.final_margin}};
}

} // namespace nlvg::config
