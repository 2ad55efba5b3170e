#include "nlvg/planner.hpp"

#include "nlvg/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace nlvg::planner {

namespace {

constexpr double kTieTolerance = 1e-9;
constexpr std::size_t kDerivativeSamples = 1000;

Vec3 unit_z() { return Vec3::UnitZ(); }

bool finite(const Vec3& v) { return v.allFinite(); }

BezierSegment straight(const Vec3& a, const Vec3& b) {
    BezierSegment seg;
    seg.ctrl = {a, a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0, b};
    return seg;
}

/// Smooth offset transition with both end tangents along `dir`.
BezierSegment s_curve(const Vec3& from, const Vec3& to, const Vec3& dir) {
    const double along = (to - from).dot(dir);
    const double handle = 0.5 * std::max(along, 0.0);
    BezierSegment seg;
    seg.ctrl = {from, from + dir * handle, to - dir * handle, to};
    return seg;
}

struct LegFrame {
    Vec3 start;
    Vec3 dir;
    double length;
};

LegFrame leg_frame(const PlanRequest& req, std::size_t leg) {
    const Vec3& a = req.waypoints[leg];
    const Vec3& b = req.waypoints[leg + 1];
    const double len = (b - a).norm();
    Vec3 dir = len > 0.0 ? Vec3((b - a) / len) : Vec3::UnitX();
    return {a, dir, len};
}

/// Perpendicular offset directions available for a detour on this leg.
std::optional<Vec3> vertical_axis(const Vec3& dir) {
    const Vec3 v = unit_z() - unit_z().dot(dir) * dir;
    if (v.norm() < 1e-9) {
        return std::nullopt;
    }
    return v.normalized();
}

Vec3 lateral_axis(const Vec3& dir) {
    const Vec3 n = unit_z().cross(dir);
    if (n.norm() < 1e-9) {
        return Vec3::UnitX();
    }
    return n.normalized();
}

/// Spheres that share one detour on one leg.
struct Cluster {
    std::vector<std::size_t> members; // indices into conflict list
    double begin{};                    // along-leg distance of the standoff entry
    double end{};
};

struct DetourShape {
    Vec3 entry;
    Vec3 first_apex;
    Vec3 last_apex;
    Vec3 exit;
    double length{};
    double apex_z_min{};
    double apex_z_max{};
};

DetourShape shape_for(const LegFrame& f, const Cluster& cl, const std::vector<Conflict>& conflicts,
                      const std::vector<ObstacleSphere>& obstacles, const Vec3& axis, double sign,
                      double margin) {
    double shift = sign > 0 ? -std::numeric_limits<double>::infinity()
                            : std::numeric_limits<double>::infinity();
    double q_first = std::numeric_limits<double>::infinity();
    double q_last = -std::numeric_limits<double>::infinity();
    for (auto idx : cl.members) {
        const Conflict& c = conflicts[idx];
        const ObstacleSphere& s = obstacles[c.sphere];
        const double q = 0.5 * (c.entry + c.exit) * f.length;
        const Vec3 closest = f.start + f.dir * q;
        const double h = sign * (s.r_safe + margin) - (closest - s.center).dot(axis);
        shift = sign > 0 ? std::max(shift, h) : std::min(shift, h);
        q_first = std::min(q_first, q);
        q_last = std::max(q_last, q);
    }
    DetourShape d;
    d.entry = f.start + f.dir * cl.begin;
    d.exit = f.start + f.dir * cl.end;
    d.first_apex = f.start + f.dir * q_first + axis * shift;
    d.last_apex = f.start + f.dir * q_last + axis * shift;
    d.length = (d.first_apex - d.entry).norm() + (d.last_apex - d.first_apex).norm() +
               (d.exit - d.last_apex).norm();
    d.apex_z_min = std::min(d.first_apex.z(), d.last_apex.z());
    d.apex_z_max = std::max(d.first_apex.z(), d.last_apex.z());
    return d;
}

bool in_corridor(const DetourShape& d, const PlanRequest& req) {
    return d.apex_z_min >= req.z_min && d.apex_z_max <= req.z_max;
}

struct Choice {
    DetourShape shape;
    Vertical side{Vertical::Over};
    bool lateral{false};
};

/// Vertical candidates first (shorter wins, ties Over); lateral only when
/// neither vertical apex fits the corridor.
std::optional<Choice> choose(const LegFrame& f, const Cluster& cl, const std::vector<Conflict>& conflicts,
                             const std::vector<ObstacleSphere>& obstacles, const PlanRequest& req,
                             double margin, bool allow_lateral) {
    if (auto axis = vertical_axis(f.dir)) {
        const DetourShape over = shape_for(f, cl, conflicts, obstacles, *axis, +1.0, margin);
        const DetourShape under = shape_for(f, cl, conflicts, obstacles, *axis, -1.0, margin);
        const bool over_ok = in_corridor(over, req);
        const bool under_ok = in_corridor(under, req);
        if (over_ok && under_ok) {
            const double tol = kTieTolerance * std::max(1.0, over.length);
            if (under.length < over.length - tol) {
                return Choice{under, Vertical::Under, false};
            }
            return Choice{over, Vertical::Over, false};
        }
        if (over_ok) {
            return Choice{over, Vertical::Over, false};
        }
        if (under_ok) {
            return Choice{under, Vertical::Under, false};
        }
    }
    if (!allow_lateral) {
        return std::nullopt;
    }
    const Vec3 n = lateral_axis(f.dir);
    const DetourShape left = shape_for(f, cl, conflicts, obstacles, n, +1.0, margin);
    const DetourShape right = shape_for(f, cl, conflicts, obstacles, n, -1.0, margin);
    const bool left_ok = in_corridor(left, req);
    const bool right_ok = in_corridor(right, req);
    if (left_ok && (!right_ok || left.length <= right.length + kTieTolerance * left.length)) {
        return Choice{left, Vertical::Over, true};
    }
    if (right_ok) {
        return Choice{right, Vertical::Over, true};
    }
    return std::nullopt;
}

std::vector<Cluster> clusters_for_leg(const LegFrame& f, const std::vector<Conflict>& conflicts,
                                      const std::vector<ObstacleSphere>& obstacles, std::size_t leg,
                                      double standoff_factor) {
    std::vector<Cluster> raw;
    for (std::size_t i = 0; i < conflicts.size(); ++i) {
        if (conflicts[i].leg != leg) {
            continue;
        }
        const double ls = standoff_factor * obstacles[conflicts[i].sphere].r_safe;
        Cluster c;
        c.members = {i};
        c.begin = std::clamp(conflicts[i].entry * f.length - ls, 0.0, f.length);
        c.end = std::clamp(conflicts[i].exit * f.length + ls, 0.0, f.length);
        raw.push_back(c);
    }
    std::sort(raw.begin(), raw.end(), [](const Cluster& a, const Cluster& b) { return a.begin < b.begin; });
    std::vector<Cluster> merged;
    for (auto& c : raw) {
        if (!merged.empty() && c.begin <= merged.back().end) {
            auto& m = merged.back();
            m.members.insert(m.members.end(), c.members.begin(), c.members.end());
            m.end = std::max(m.end, c.end);
        } else {
            merged.push_back(std::move(c));
        }
    }
    return merged;
}

std::optional<PlannedPath> build_geometry(const PlanRequest& req, const std::vector<ObstacleSphere>& obstacles,
                                          double margin) {
    const auto conflicts = detect_conflicts(req, obstacles);
    PlannedPath path;
    path.final_margin = margin;
    auto push = [&path](BezierSegment seg, SegmentRole role) {
        path.segments.push_back(std::move(seg));
        path.roles.push_back(role);
    };

    for (std::size_t leg = 0; leg + 1 < req.waypoints.size(); ++leg) {
        const LegFrame f = leg_frame(req, leg);
        const auto clusters = clusters_for_leg(f, conflicts, obstacles, leg, req.options.standoff_factor);
        double cursor = 0.0;
        for (const auto& cl : clusters) {
            const auto choice = choose(f, cl, conflicts, obstacles, req, margin, true);
            if (!choice) {
                return std::nullopt;
            }
            path.lateral_fallback = path.lateral_fallback || choice->lateral;
            const DetourShape& d = choice->shape;
            if (cl.begin > cursor) {
                push(straight(f.start + f.dir * cursor, d.entry), SegmentRole::Leg);
            }
            push(s_curve(d.entry, d.first_apex, f.dir), SegmentRole::Detour);
            if ((d.last_apex - d.first_apex).norm() > 0.0) {
                push(straight(d.first_apex, d.last_apex), SegmentRole::Detour);
            }
            push(s_curve(d.last_apex, d.exit, f.dir), SegmentRole::Detour);
            cursor = cl.end;
        }
        if (clusters.empty()) {
            push(straight(req.waypoints[leg], req.waypoints[leg + 1]), SegmentRole::Leg);
        } else if (cursor < f.length) {
            push(straight(f.start + f.dir * cursor, req.waypoints[leg + 1]), SegmentRole::Leg);
        }
    }
    return path;
}

double clearance_at(const Vec3& p, const std::vector<ObstacleSphere>& obstacles) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : obstacles) {
        best = std::min(best, (p - s.center).norm() - s.r_safe);
    }
    return best;
}

std::size_t clearance_samples(const BezierSegment& seg, double step) {
    double max_edge = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        max_edge = std::max(max_edge, (seg.ctrl[i + 1] - seg.ctrl[i]).norm());
    }
    // |B'| <= 3 * max control edge, so this keeps arc spacing <= step.
    return std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(3.0 * max_edge / step)));
}

/// Records clearance and corridor checks; true when both hold everywhere.
bool check_geometry(PlannedPath& path, const PlanRequest& req, const std::vector<ObstacleSphere>& obstacles) {
    const double step = req.options.clearance_step;
    path.clearance.clear();
    path.min_clearance_margin = std::numeric_limits<double>::infinity();
    path.corridor_ok = true;
    for (const auto& seg : path.segments) {
        const std::size_t n = clearance_samples(seg, step);
        for (std::size_t k = 0; k <= n; ++k) {
            const Vec3 p = seg.point(static_cast<double>(k) / static_cast<double>(n));
            if (p.z() < req.z_min - 1e-9 || p.z() > req.z_max + 1e-9) {
                path.corridor_ok = false;
            }
            if (!obstacles.empty()) {
                const double c = clearance_at(p, obstacles);
                path.clearance.push_back(c);
                path.min_clearance_margin = std::min(path.min_clearance_margin, c);
            }
        }
    }
    // Between samples the curve moves at most step/2 from the nearest sample.
    return path.corridor_ok && path.min_clearance_margin >= 0.5 * step;
}

} // namespace

void PlanRequest::validate() const {
    if (waypoints.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "plan request needs at least two waypoints");
    }
    for (const auto& w : waypoints) {
        if (!finite(w)) {
            throw Error(ErrorCode::NonFinite, "waypoint is not finite");
        }
    }
    if (!(v_max > 0.0) || !(a_max > 0.0) || !(z_min < z_max) || !(sample_dt > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "plan request needs v_max, a_max, sample_dt > 0 and z_min < z_max");
    }
    if (!(options.standoff_factor >= 0.0) || !(options.margin >= 0.0) || !(options.inflation > 1.0) ||
        options.max_inflations < 0 || !(options.clearance_step > 0.0) || !(options.min_duration > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "invalid planner options");
    }
}

Vec3 BezierSegment::point(double u) const {
    const double v = 1.0 - u;
    return v * v * v * ctrl[0] + 3.0 * v * v * u * ctrl[1] + 3.0 * v * u * u * ctrl[2] + u * u * u * ctrl[3];
}

Vec3 BezierSegment::d1(double u) const {
    const double v = 1.0 - u;
    return 3.0 * v * v * (ctrl[1] - ctrl[0]) + 6.0 * v * u * (ctrl[2] - ctrl[1]) +
           3.0 * u * u * (ctrl[3] - ctrl[2]);
}

Vec3 BezierSegment::d2(double u) const {
    return 6.0 * (1.0 - u) * (ctrl[2] - 2.0 * ctrl[1] + ctrl[0]) + 6.0 * u * (ctrl[3] - 2.0 * ctrl[2] + ctrl[1]);
}

double BezierSegment::polygon_length() const {
    return (ctrl[1] - ctrl[0]).norm() + (ctrl[2] - ctrl[1]).norm() + (ctrl[3] - ctrl[2]).norm();
}

double PlannedPath::total_duration() const {
    double total = 0.0;
    for (const auto& s : segments) {
        total += s.duration;
    }
    return total;
}

std::vector<Conflict> detect_conflicts(const PlanRequest& request, const std::vector<ObstacleSphere>& obstacles) {
    request.validate();
    std::vector<Conflict> out;
    for (std::size_t leg = 0; leg + 1 < request.waypoints.size(); ++leg) {
        const Vec3& p0 = request.waypoints[leg];
        const Vec3 d = request.waypoints[leg + 1] - p0;
        const double a = d.squaredNorm();
        for (std::size_t k = 0; k < obstacles.size(); ++k) {
            const ObstacleSphere& s = obstacles[k];
            const Vec3 rel = p0 - s.center;
            const double c = rel.squaredNorm() - s.r_safe * s.r_safe;
            if (a == 0.0) {
                if (c <= 0.0) {
                    out.push_back({leg, k, s.id, 0.0, 0.0});
                }
                continue;
            }
            const double b = 2.0 * d.dot(rel);
            const double disc = b * b - 4.0 * a * c;
            if (disc < 0.0) {
                continue;
            }
            const double root = std::sqrt(disc);
            const double s1 = (-b - root) / (2.0 * a);
            const double s2 = (-b + root) / (2.0 * a);
            if (s2 < 0.0 || s1 > 1.0) {
                continue;
            }
            out.push_back({leg, k, s.id, std::max(s1, 0.0), std::min(s2, 1.0)});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Conflict& x, const Conflict& y) {
        return x.leg != y.leg ? x.leg < y.leg : x.entry < y.entry;
    });
    return out;
}

Decision vertical_decision(const Conflict& conflict, const ObstacleSphere& sphere, const PlanRequest& request,
                           double margin) {
    request.validate();
    if (conflict.leg + 1 >= request.waypoints.size()) {
        throw Error(ErrorCode::InvalidArgument, "conflict refers to a leg outside the request");
    }
    const LegFrame f = leg_frame(request, conflict.leg);
    const double ls = request.options.standoff_factor * sphere.r_safe;
    Conflict local = conflict;
    local.sphere = 0;
    const std::vector<Conflict> conflicts{local};
    const std::vector<ObstacleSphere> spheres{sphere};
    Cluster cl;
    cl.members = {0};
    // Unclamped standoff points: the cost compares full detour lengths.
    cl.begin = conflict.entry * f.length - ls;
    cl.end = conflict.exit * f.length + ls;
    const auto choice = choose(f, cl, conflicts, spheres, request, margin, false);
    if (!choice) {
        throw Error(ErrorCode::NoVerticalRoom, "neither apex of sphere '" + sphere.id + "' fits the corridor");
    }
    return {choice->side, choice->shape.first_apex, choice->shape.length};
}

PlannedPath plan_detour(const PlanRequest& request, const std::vector<ObstacleSphere>& obstacles) {
    request.validate();
    for (const auto& s : obstacles) {
        if (!(s.r_safe > 0.0) || !finite(s.center)) {
            throw Error(ErrorCode::InvalidArgument, "obstacle '" + s.id + "' needs R_safe > 0");
        }
    }
    for (const auto& w : request.waypoints) {
        if (w.z() < request.z_min || w.z() > request.z_max) {
            throw Error(ErrorCode::PlanInfeasible, "waypoint lies outside the altitude corridor");
        }
        if (!obstacles.empty() && clearance_at(w, obstacles) <= 0.0) {
            throw Error(ErrorCode::PlanInfeasible, "waypoint lies inside a keep-out sphere");
        }
    }

    double margin = request.options.margin;
    for (int attempt = 0; attempt <= request.options.max_inflations; ++attempt) {
        auto geometry = build_geometry(request, obstacles, margin);
        if (geometry && check_geometry(*geometry, request, obstacles)) {
            return time_parameterize(std::move(*geometry), request.v_max, request.a_max,
                                     request.options.min_duration);
        }
        margin *= request.options.inflation;
    }
    throw Error(ErrorCode::PlanInfeasible, "no clear detour after " +
                                               std::to_string(request.options.max_inflations) +
                                               " margin inflations");
}

PlannedPath time_parameterize(PlannedPath path, double v_max, double a_max, double min_duration) {
    if (!(v_max > 0.0) || !(a_max > 0.0) || !(min_duration > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "time_parameterize needs positive limits");
    }
    for (auto& seg : path.segments) {
        double max_d1 = 0.0;
        for (std::size_t k = 0; k <= kDerivativeSamples; ++k) {
            const double u = static_cast<double>(k) / static_cast<double>(kDerivativeSamples);
            max_d1 = std::max(max_d1, seg.d1(u).norm());
        }
        // B'' is linear in u, so its norm peaks at an endpoint.
        const double max_d2 = std::max(seg.d2(0.0).norm(), seg.d2(1.0).norm());
        const double duration = std::max(max_d1 / v_max, std::sqrt(max_d2 / a_max));
        seg.duration = duration > 0.0 ? duration : min_duration;
    }
    path.velocity_ok = true;
    path.acceleration_ok = true;
    return path;
}

trajectory::ReferenceSample path_reference(const PlannedPath& path, double t) {
    trajectory::ReferenceSample r;
    r.t = t;
    if (path.segments.empty()) {
        return r;
    }
    const double total = path.total_duration();
    if (t >= total) {
        const auto& last = path.segments.back();
        const Vec3 p = last.ctrl[3];
        r.x = p.x();
        r.y = p.y();
        r.z = p.z();
        if (t == total) {
            const Vec3 v = last.d1(1.0) / last.duration;
            const Vec3 a = last.d2(1.0) / (last.duration * last.duration);
            r.vx = v.x(); r.vy = v.y(); r.vz = v.z();
            r.ax = a.x(); r.ay = a.y(); r.az = a.z();
        }
        return r;
    }
    double start = 0.0;
    std::size_t i = 0;
    while (i + 1 < path.segments.size() && t >= start + path.segments[i].duration) {
        start += path.segments[i].duration;
        ++i;
    }
    const auto& seg = path.segments[i];
    const double u = std::clamp((t - start) / seg.duration, 0.0, 1.0);
    const Vec3 p = seg.point(u);
    const Vec3 v = seg.d1(u) / seg.duration;
    const Vec3 a = seg.d2(u) / (seg.duration * seg.duration);
    r.x = p.x(); r.y = p.y(); r.z = p.z();
    r.vx = v.x(); r.vy = v.y(); r.vz = v.z();
    r.ax = a.x(); r.ay = a.y(); r.az = a.z();
    return r;
}

std::vector<trajectory::ReferenceSample> sample_path(const PlannedPath& path, double dt, trajectory::YawMode yaw) {
    if (!(dt > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "sample_path needs dt > 0");
    }
    const double total = path.total_duration();
    std::vector<trajectory::ReferenceSample> out;
    trajectory::YawTracker tracker(yaw);
    const auto n = static_cast<std::size_t>(std::floor(total / dt));
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = dt * static_cast<double>(k);
        if (t >= total) {
            break;
        }
        out.push_back(path_reference(path, t));
        tracker.apply(out.back());
    }
    out.push_back(path_reference(path, total));
    tracker.apply(out.back());
    return out;
}

double sampled_clearance_margin(const PlannedPath& path, const std::vector<ObstacleSphere>& obstacles,
                                std::size_t samples_per_segment) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& seg : path.segments) {
        for (std::size_t k = 0; k <= samples_per_segment; ++k) {
            const double u = static_cast<double>(k) / static_cast<double>(samples_per_segment);
            best = std::min(best, clearance_at(seg.point(u), obstacles));
        }
    }
    return best;
}

} // namespace nlvg::planner
