#include "magiclens/config.hpp"

#include "magiclens/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace magiclens {

namespace {

struct Entry {
    std::size_t line;
    std::string key;
    std::string value;
};

std::vector<Entry> tokenize(std::string_view text)
{
    std::vector<Entry> out;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = csv::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key(csv::trim(line.substr(0, eq)));
        std::string value(csv::trim(line.substr(eq + 1)));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (!seen.insert(key).second)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        out.push_back({lineno, std::move(key), std::move(value)});
    }
    return out;
}

[[noreturn]] void bad_value(const Entry& e, const std::string& why)
{
    throw ConfigError("line " + std::to_string(e.line) + ": " + e.key + ": " + why);
}

double to_double(const Entry& e)
{
    try {
        const double v = csv::parse_double(e.value);
        if (!std::isfinite(v))
            bad_value(e, "value must be finite");
        return v;
    } catch (const std::invalid_argument&) {
        bad_value(e, "expected a number, got '" + e.value + "'");
    }
}

long long to_int(const Entry& e)
{
    try {
        return csv::parse_int(e.value);
    } catch (const std::invalid_argument&) {
        bad_value(e, "expected an integer, got '" + e.value + "'");
    }
}

std::vector<double> to_list(const Entry& e, std::string_view text, std::size_t expect)
{
    std::vector<double> out;
    for (auto f : csv::split(text, ',')) {
        try {
            out.push_back(csv::parse_double(f));
        } catch (const std::invalid_argument&) {
            bad_value(e, "expected numbers, got '" + std::string(f) + "'");
        }
    }
    if (expect && out.size() != expect)
        bad_value(e, "expected " + std::to_string(expect) + " comma-separated numbers");
    return out;
}

Vec3 to_vec3(const Entry& e)
{
    const auto v = to_list(e, e.value, 3);
    return {v[0], v[1], v[2]};
}

template <class Fn>
auto to_enum(const Entry& e, Fn parse)
{
    try {
        return parse(e.value);
    } catch (const InvalidArgument& ex) {
        bad_value(e, ex.what());
    }
}

/// Returns false if key is not a trace key.
bool apply_trace_key(TraceSpec& s, std::string_view key, const Entry& e)
{
    if (key == "generator")
        s.generator = to_enum(e, parse_trace_generator);
    else if (key == "preset") {
        if (e.value != "large_workspace")
            bad_value(e, "unknown preset '" + e.value + "' (expected large_workspace)");
        s = large_workspace_trace_spec();
    } else if (key == "frames")
        s.frames = to_int(e);
    else if (key == "rate_hz")
        s.rate_hz = to_double(e);
    else if (key == "seed")
        s.seed = static_cast<std::uint64_t>(to_int(e));
    else if (key == "start_eye_mm")
        s.start_eye_mm = to_vec3(e);
    else if (key == "ipd_mm")
        s.ipd_mm = to_double(e);
    else if (key == "dwell_frames")
        s.dwell_frames = to_int(e);
    else if (key == "transition_frames")
        s.transition_frames = to_int(e);
    else if (key == "dwell_segments")
        s.dwell_segments = to_int(e);
    else if (key == "displacement_mm")
        s.displacement_mm = to_vec3(e);
    else if (key == "amplitude_mm")
        s.amplitude_mm = to_vec3(e);
    else if (key == "period_frames")
        s.period_frames = to_double(e);
    else if (key == "step_sigma_mm")
        s.step_sigma_mm = to_double(e);
    else if (key == "min_eye_z_mm")
        s.min_eye_z_mm = to_double(e);
    else if (key == "device_position_mm")
        s.device_translation_mm = to_vec3(e);
    else if (key == "device_rotation_q") {
        const auto q = to_list(e, e.value, 4);
        s.device_rotation = Quat(q[0], q[1], q[2], q[3]);
    } else
        return false;
    return true;
}

// "preset" resets every other trace key, so it must be applied first.
std::vector<Entry> preset_first(std::vector<Entry> entries, std::string_view preset_key)
{
    std::stable_partition(entries.begin(), entries.end(),
                          [&](const Entry& e) { return e.key == preset_key; });
    return entries;
}

void apply_intrinsics_key(CameraIntrinsics& k, Vec3& pos, std::string_view key, const Entry& e)
{
    if (key == "fx")
        k.fx = to_double(e);
    else if (key == "fy")
        k.fy = to_double(e);
    else if (key == "cx")
        k.cx = to_double(e);
    else if (key == "cy")
        k.cy = to_double(e);
    else if (key == "width_px")
        k.width_px = static_cast<int>(to_int(e));
    else if (key == "height_px")
        k.height_px = static_cast<int>(to_int(e));
    else if (key == "position_mm")
        pos = to_vec3(e);
    else
        throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir)
{
    ExperimentConfig c;
    bool eps_min_set = false;
    for (const Entry& e : preset_first(tokenize(text), "trace.preset")) {
        const std::string_view key = e.key;
        const auto dot = key.find('.');
        const std::string_view group = dot == std::string_view::npos ? key : key.substr(0, dot);
        const std::string_view leaf = dot == std::string_view::npos ? "" : key.substr(dot + 1);

        if (key == "modes") {
            c.modes.clear();
            for (auto m : csv::split(e.value, ',')) {
                try {
                    c.modes.push_back(parse_render_mode(csv::trim(m)));
                } catch (const InvalidArgument& ex) {
                    bad_value(e, ex.what());
                }
            }
        } else if (key == "seed") {
            c.seed = static_cast<std::uint64_t>(to_int(e));
        } else if (group == "trace") {
            if (leaf == "file") {
                std::filesystem::path p(e.value);
                c.trace_file = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
            } else if (leaf == "head_offset_mm") {
                c.head_offset_mm = to_double(e);
            } else if (!apply_trace_key(c.trace, leaf, e)) {
                throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
            }
        } else if (key == "display.width_mm") {
            c.display_width_mm = to_double(e);
        } else if (key == "display.height_mm") {
            c.display_height_mm = to_double(e);
        } else if (key == "display.width_px") {
            c.display_width_px = static_cast<int>(to_int(e));
        } else if (key == "display.height_px") {
            c.display_height_px = static_cast<int>(to_int(e));
        } else if (key == "plane.point_mm") {
            c.plane_point_mm = to_vec3(e);
        } else if (key == "plane.normal") {
            c.plane_normal = to_vec3(e);
        } else if (key == "plane.u_axis") {
            c.plane_u_axis = to_vec3(e);
        } else if (key == "plane.width_mm") {
            c.plane_width_mm = to_double(e);
        } else if (key == "plane.height_mm") {
            c.plane_height_mm = to_double(e);
        } else if (group == "front_cam") {
            apply_intrinsics_key(c.front_cam, c.front_cam_position_mm, leaf, e);
        } else if (group == "back_cam") {
            apply_intrinsics_key(c.back_cam, c.back_cam_position_mm, leaf, e);
        } else if (key == "dpr.fit") {
            c.dpr_fit = to_enum(e, parse_fit_policy);
        } else if (key == "fupr.distance_mm") {
            c.fupr.distance_mm = to_double(e);
        } else if (key == "fupr.ipd_mm") {
            c.fupr.ipd_mm = to_double(e);
        } else if (key == "scheduler.eps_max_px") {
            if (e.value == "auto") {
                c.eps_auto = true;
            } else {
                c.eps_auto = false;
                c.scheduler.eps_max_px = to_double(e);
            }
        } else if (key == "scheduler.eps_min_px") {
            c.scheduler.eps_min_px = to_double(e);
            eps_min_set = true;
        } else if (key == "scheduler.refine_factor") {
            c.scheduler.refine_factor = to_double(e);
        } else if (key == "scheduler.policy") {
            c.scheduler.policy = to_enum(e, parse_threshold_policy);
        } else if (key == "scheduler.decay_rate") {
            c.scheduler.decay_rate = to_double(e);
        } else if (key == "scheduler.metric") {
            c.scheduler.metric = to_enum(e, parse_eye_metric);
        } else if (key == "flow.noise_sigma_px") {
            c.flow.sigma_px = to_double(e);
        } else if (key == "flow.drift_px_per_frame") {
            c.flow.drift_px_per_frame = to_double(e);
        } else if (key == "flow.p_fail") {
            c.flow.p_fail = to_double(e);
        } else if (key == "face.jitter_sigma_mm") {
            c.face.jitter_sigma_mm = to_double(e);
        } else if (key == "face.latency_frames") {
            c.face.latency_frames = to_int(e);
        } else if (key == "face.cost_ms") {
            c.face_cost_ms = to_double(e);
        } else if (key == "face.max_rate_hz") {
            c.face.max_rate_hz = to_double(e);
        } else if (key == "cost.flow_ms") {
            c.cost.flow_ms = to_double(e);
        } else if (key == "cost.render_base_ms") {
            c.cost.render_base_ms = to_double(e);
        } else if (key == "cost.tracking_frame_share") {
            c.cost.tracking_frame_share = to_double(e);
        } else if (key.starts_with("cost.face_track_ms_")) {
            // cost.face_track_ms_<W>x<H>
            const std::string_view res = key.substr(std::string_view("cost.face_track_ms_").size());
            const auto x = res.find('x');
            try {
                if (x == std::string_view::npos)
                    throw std::invalid_argument("");
                const int w = static_cast<int>(csv::parse_int(res.substr(0, x)));
                const int h = static_cast<int>(csv::parse_int(res.substr(x + 1)));
                c.cost.face_track_ms[{w, h}] = to_double(e);
            } catch (const std::invalid_argument&) {
                throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key +
                                  "' (expected cost.face_track_ms_<W>x<H>)");
            }
        } else if (key == "targets.points") {
            c.targets.clear();
            for (auto pt : csv::split(e.value, ';')) {
                if (csv::trim(pt).empty())
                    continue;
                const auto v = to_list(e, pt, 2);
                c.targets.emplace_back(v[0], v[1]);
            }
        } else if (key == "targets.grid") {
            const auto x = e.value.find('x');
            try {
                if (x == std::string::npos)
                    throw std::invalid_argument("");
                c.target_grid_x = static_cast<int>(csv::parse_int(std::string_view(e.value).substr(0, x)));
                c.target_grid_y = static_cast<int>(csv::parse_int(std::string_view(e.value).substr(x + 1)));
            } catch (const std::invalid_argument&) {
                bad_value(e, "expected <nx>x<ny>, e.g. 9x5");
            }
        } else if (key == "targets.margin_mm") {
            c.target_margin_mm = to_double(e);
        } else if (key == "targets.radius_mm") {
            c.target_radius_mm = to_double(e);
        } else if (key == "eval.frames") {
            c.eval_frames = to_enum(e, parse_eval_frames);
        } else if (key == "eval.dwell_tol_mm") {
            c.dwell_tol_mm = to_double(e);
        } else if (key == "output.px_per_mm") {
            c.px_per_mm = to_double(e);
        } else {
            throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
        }
    }
    if (!c.eps_auto && !eps_min_set)
        c.scheduler.eps_min_px = 0.1 * c.scheduler.eps_max_px;
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path)
{
    return parse_experiment_config(read_file(path), path.parent_path());
}

TraceSpec parse_trace_spec(std::string_view text)
{
    TraceSpec s;
    auto entries = tokenize(text);
    std::stable_partition(entries.begin(), entries.end(), [](const Entry& e) {
        return e.key == "preset" || e.key == "trace.preset";
    });
    for (const Entry& e : entries) {
        std::string_view key = e.key;
        if (key.starts_with("trace."))
            key.remove_prefix(6);
        if (!apply_trace_key(s, key, e))
            throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
    }
    try {
        s.validate();
    } catch (const InvalidArgument& ex) {
        throw ConfigError(ex.what());
    }
    return s;
}

TraceSpec load_trace_spec(const std::filesystem::path& path) { return parse_trace_spec(read_file(path)); }

}  // namespace magiclens
