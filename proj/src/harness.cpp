#include "magiclens/harness.hpp"

#include "magiclens/csv.hpp"
#include "magiclens/kernels.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace magiclens {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Random stream ids; every mode draws from the same ids so that UPR and
// AAUPR see the same jitter sequence from the first invocation on.
constexpr std::uint64_t kFaceStream = 1;
constexpr std::uint64_t kFlowStream = 2;

}  // namespace

std::string_view to_string(EvalFrames e) { return e == EvalFrames::dwell ? "dwell" : "all"; }

EvalFrames parse_eval_frames(std::string_view s)
{
    if (s == "dwell")
        return EvalFrames::dwell;
    if (s == "all")
        return EvalFrames::all;
    throw InvalidArgument("unknown eval frame set '" + std::string(s) + "'");
}

std::string_view to_string(SweepParam p)
{
    switch (p) {
    case SweepParam::eps_max: return "eps_max";
    case SweepParam::jitter_sigma: return "jitter_sigma";
    case SweepParam::head_displacement: return "head_displacement";
    }
    return "?";
}

SweepParam parse_sweep_param(std::string_view s)
{
    for (auto p : {SweepParam::eps_max, SweepParam::jitter_sigma, SweepParam::head_displacement})
        if (s == to_string(p))
            return p;
    throw InvalidArgument("unknown sweep parameter '" + std::string(s) +
                          "' (expected eps_max, jitter_sigma or head_displacement)");
}

// ---------------------------------------------------------------------------

DisplayModel ExperimentConfig::display(const RigidTransform& pose) const
{
    return {display_width_mm, display_height_mm, display_width_px, display_height_px, pose};
}

PinholeCamera ExperimentConfig::front_camera() const
{
    return PinholeCamera::mounted(front_cam, front_cam_position_mm, CameraFacing::front);
}

PinholeCamera ExperimentConfig::back_camera() const
{
    return PinholeCamera::mounted(back_cam, back_cam_position_mm, CameraFacing::back);
}

ScenePlane ExperimentConfig::plane() const
{
    return {plane_point_mm, plane_normal, plane_u_axis, plane_width_mm, plane_height_mm};
}

ThresholdConfig ExperimentConfig::threshold_config() const
{
    ThresholdConfig t = scheduler;
    if (eps_auto) {
        t.eps_max_px = epsilon_default(front_camera());
        t.eps_min_px = 0.1 * t.eps_max_px;
    }
    return t;
}

FaceTrackerParams ExperimentConfig::face_params() const
{
    FaceTrackerParams p = face;
    p.cost_ms = face_cost_ms ? *face_cost_ms
                             : cost.face_track_ms_for(front_cam.width_px, front_cam.height_px);
    return p;
}

std::vector<Vec2> ExperimentConfig::target_points() const
{
    if (!targets.empty())
        return targets;
    std::vector<Vec2> pts;
    const double x0 = -plane_width_mm / 2 + target_margin_mm;
    const double y0 = -plane_height_mm / 2 + target_margin_mm;
    const double sx = target_grid_x > 1 ? (plane_width_mm - 2 * target_margin_mm) / (target_grid_x - 1) : 0;
    const double sy = target_grid_y > 1 ? (plane_height_mm - 2 * target_margin_mm) / (target_grid_y - 1) : 0;
    for (int j = 0; j < target_grid_y; ++j)
        for (int i = 0; i < target_grid_x; ++i)
            pts.emplace_back(target_grid_x > 1 ? x0 + i * sx : 0.0,
                             target_grid_y > 1 ? y0 + j * sy : 0.0);
    return pts;
}

HeadTrace ExperimentConfig::load_trace() const
{
    HeadTrace loaded;
    if (!trace_file.empty()) {
        std::ifstream in(trace_file);
        if (!in)
            throw ConfigError("trace.file: cannot open '" + trace_file + "'");
        try {
            loaded = read_trace_csv(in);
        } catch (const std::runtime_error& e) {
            throw ConfigError(std::string("trace.file: ") + e.what());
        }
    } else {
        loaded = generate_trace(trace);
    }
    if (head_offset_mm != 0.0)
        for (auto& f : loaded.frames)
            f.eye_mm.x() += head_offset_mm;
    return loaded;
}

void ExperimentConfig::validate() const
{
    try {
        if (modes.empty())
            throw ConfigError("modes: at least one render mode is required");
        if (trace_file.empty())
            trace.validate();
        display();
        front_camera();
        back_camera();
        plane();
        if (!(fupr.distance_mm > 0))
            throw ConfigError("fupr.distance_mm must be > 0");
        if (!(fupr.ipd_mm >= 0))
            throw ConfigError("fupr.ipd_mm must be >= 0");
        threshold_config().validate();
        flow.validate();
        cost.validate();
        face_params().validate();
        if (trace_file.empty() && trace.rate_hz > face.max_rate_hz + 1e-9)
            throw ConfigError("trace.rate_hz exceeds face.max_rate_hz; per-frame tracking would "
                              "violate the face tracker rate ceiling");
        if (targets.empty() && (target_grid_x < 1 || target_grid_y < 1))
            throw ConfigError("targets.grid must be at least 1x1");
        if (!(target_radius_mm > 0))
            throw ConfigError("targets.radius_mm must be > 0");
        const ScenePlane p = plane();
        for (const Vec2& t : target_points())
            if (!p.contains(t))
                throw ConfigError("targets: point (" + csv::format(t.x()) + ", " +
                                  csv::format(t.y()) + ") lies outside the plane bounds");
        if (!(dwell_tol_mm >= 0))
            throw ConfigError("eval.dwell_tol_mm must be >= 0");
        if (px_per_mm && !(*px_per_mm > 0))
            throw ConfigError("output.px_per_mm must be > 0");
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

// ---------------------------------------------------------------------------

const ModeRun& RunResult::of(RenderMode m) const
{
    for (const auto& r : runs)
        if (r.summary.mode == m)
            return r;
    throw InvalidArgument("run result has no mode " + std::string(to_string(m)));
}

ModeRun run_mode(const ExperimentConfig& config, const HeadTrace& trace, RenderMode mode)
{
    const std::int64_t n = static_cast<std::int64_t>(trace.size());
    if (n == 0)
        throw ConfigError("trace has no frames");

    const PinholeCamera front = config.front_camera();
    const PinholeCamera back = config.back_camera();
    const ScenePlane plane = config.plane();
    const DisplayModel display = config.display();
    const ThresholdConfig tcfg = config.threshold_config();
    const EyeState calibration_eye = fupr_eye(config.fupr);
    const std::vector<Vec2> targets = config.target_points();
    const std::vector<bool> dwell = dwell_mask(trace, config.dwell_tol_mm);

    FaceTrackerProxy face(config.face_params(), derive_seed(config.seed, kFaceStream));
    FlowTrackerProxy flow(config.flow, derive_seed(config.seed, kFlowStream));
    SchedulerState sched = initial_state(tcfg);

    std::vector<Nanoseconds> charge_at(static_cast<std::size_t>(n), Nanoseconds{0});
    std::vector<FaceTrackResult> pending;  // ordered by ready_frame
    std::size_t next_pending = 0;
    std::optional<EyeState> estimate;
    Nanoseconds cumulative{0};

    auto request = [&](std::int64_t k, const TraceFrame& f,
                       const EyeState& truth) -> const FaceTrackResult& {
        pending.push_back(face.track(truth, k, f.t_ms));
        const auto& r = pending.back();
        const std::int64_t charge_frame = std::min(r.ready_frame, n - 1);
        charge_at[static_cast<std::size_t>(charge_frame)] += ms_to_ns(r.charge_ms);
        return r;
    };

    ModeRun out;
    out.frames.reserve(static_cast<std::size_t>(n));
    double error_sum = 0, frame_time_sum = 0;
    std::int64_t error_count = 0;

    for (std::int64_t k = 0; k < n; ++k) {
        const TraceFrame& f = trace.frames[static_cast<std::size_t>(k)];
        const EyeState truth = f.true_eye();
        const ViewRig rig{display.with_pose(f.device_pose()), back, plane, config.dpr_fit};

        FrameRecord rec;
        rec.frame = k;
        rec.mode = mode;
        rec.true_eye_mm = truth.cyclopean();

        if (mode == RenderMode::UPR) {
            request(k, f, truth);
        } else if (mode == RenderMode::AAUPR) {
            const FlowMeasurement m = flow.measure(front, truth);
            StepResult s = step(sched, m.eye_px, tcfg);
            rec.decision = s.decision;
            sched = s.state;
            if (s.decision.recalculate()) {
                const FaceTrackResult& r = request(k, f, truth);
                // The 2D detection re-seeds the flow tracker at this frame.
                // An estimate behind the front camera cannot be projected;
                // the flow positions (or the previous ones) stand in.
                const auto calc = project_eyes(front, r.estimate, false);
                sched = apply_recalculation(
                    sched, calc ? *calc : m.eye_px.value_or(sched.pos_eye_calc), tcfg);
                flow.reset_drift();
            }
        }

        while (next_pending < pending.size() && pending[next_pending].ready_frame <= k)
            estimate = pending[next_pending++].estimate;

        const Nanoseconds charge = charge_at[static_cast<std::size_t>(k)];
        cumulative += charge;
        rec.tracking_charge_ms = ns_to_ms(charge);
        rec.cumulative_tracking_ms = ns_to_ms(cumulative);
        rec.frame_time_ms = config.cost.render_base_ms +
                            (mode == RenderMode::AAUPR ? config.cost.flow_ms : 0.0) +
                            config.cost.tracking_frame_share * rec.tracking_charge_ms;
        frame_time_sum += rec.frame_time_ms;

        std::optional<EyeState> render_eye;
        switch (mode) {
        case RenderMode::UPR:
        case RenderMode::AAUPR: render_eye = estimate; break;
        case RenderMode::FUPR: render_eye = calibration_eye; break;
        case RenderMode::DPR: render_eye = truth; break;  // unused by DPR drawing
        }
        if (render_eye && mode != RenderMode::DPR)
            rec.estimated_eye_mm = render_eye->cyclopean();

        const bool evaluate =
            config.eval_frames == EvalFrames::all || dwell[static_cast<std::size_t>(k)];
        if (evaluate && render_eye) {
            for (std::size_t i = 0; i < targets.size(); ++i) {
                const Vec3 target = plane.to_world(targets[i]);
                // Visible when the true eye sees it through the panel.
                const auto seen = draw_position(RenderMode::UPR, target, truth, rig);
                if (!seen || !rig.display.contains_px(*seen))
                    continue;
                const auto e = pointing_error(mode, target, *render_eye, truth, rig);
                rec.errors.push_back({static_cast<int>(i), e ? *e : kNaN});
                if (e) {
                    error_sum += *e;
                    ++error_count;
                }
            }
        }
        out.frames.push_back(std::move(rec));
    }

    ModeSummary& s = out.summary;
    s.mode = mode;
    s.frames = n;
    s.error_samples = error_count;
    if (error_count > 0) {
        s.mean_error_mm = error_sum / static_cast<double>(error_count);
        // Second pass keeps the variance free of cancellation.
        double acc = 0;
        for (const auto& r : out.frames)
            for (const auto& e : r.errors)
                if (!std::isnan(e.error_mm))
                    acc += (e.error_mm - s.mean_error_mm) * (e.error_mm - s.mean_error_mm);
        s.sd_error_mm = error_count > 1 ? std::sqrt(acc / static_cast<double>(error_count - 1)) : 0.0;
    } else {
        s.mean_error_mm = kNaN;
        s.sd_error_mm = kNaN;
    }
    s.invocations = face.invocations();
    s.invocation_fraction = static_cast<double>(s.invocations) / static_cast<double>(n);
    s.total_tracking_ms = ns_to_ms(cumulative);
    s.mean_frame_time_ms = frame_time_sum / static_cast<double>(n);
    return out;
}

RunResult run(const ExperimentConfig& config)
{
    config.validate();
    const HeadTrace trace = config.load_trace();
    if (trace.size() > 1 && trace.rate_hz > config.face.max_rate_hz + 1e-9)
        throw ConfigError("trace rate exceeds face.max_rate_hz");
    RunResult result;
    for (RenderMode m : config.modes)
        result.runs.push_back(run_mode(config, trace, m));
    return result;
}

// ---------------------------------------------------------------------------

ExperimentConfig with_param(const ExperimentConfig& base, SweepParam p, double value)
{
    if (!std::isfinite(value))
        throw ConfigError("sweep values must be finite");
    ExperimentConfig c = base;
    switch (p) {
    case SweepParam::eps_max:
        c.eps_auto = false;
        c.scheduler.eps_max_px = value;
        c.scheduler.eps_min_px = 0.1 * value;
        break;
    case SweepParam::jitter_sigma: c.face.jitter_sigma_mm = value; break;
    case SweepParam::head_displacement: c.head_offset_mm = value; break;
    }
    return c;
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepParam p,
                            const std::vector<double>& values, bool parallel)
{
    if (values.empty())
        throw ConfigError("sweep: at least one value is required");
    std::vector<ExperimentConfig> cells;
    cells.reserve(values.size());
    for (double v : values)
        cells.push_back(with_param(base, p, v));
    for (const auto& c : cells)
        c.validate();

    const auto results = parallel ? kernels::run_cells_parallel(cells) : kernels::run_cells_serial(cells);
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < values.size(); ++i) {
        SweepRow row{values[i], {}};
        for (const auto& r : results[i].runs)
            row.summaries.push_back(r.summary);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------

std::string frame_csv_header()
{
    return "frame,mode,decision,reason,e_px,delta_e_px,est_eye_x_mm,est_eye_y_mm,est_eye_z_mm,"
           "true_eye_x_mm,true_eye_y_mm,true_eye_z_mm,pointing_error_mm,tracking_charge_ms,"
           "cumulative_tracking_ms,frame_time_ms";
}

void write_frames_csv(std::ostream& os, const ModeRun& run)
{
    using csv::format;
    os << frame_csv_header() << '\n';
    for (const FrameRecord& r : run.frames) {
        os << r.frame << ',' << to_string(r.mode) << ',';
        if (r.decision)
            os << to_string(r.decision->kind) << ',' << to_string(r.decision->reason) << ','
               << format(r.decision->e_px) << ',' << format(r.decision->delta_e_px) << ',';
        else
            os << ",,,,";
        if (r.estimated_eye_mm)
            os << format(r.estimated_eye_mm->x()) << ',' << format(r.estimated_eye_mm->y()) << ','
               << format(r.estimated_eye_mm->z()) << ',';
        else
            os << ",,,";
        os << format(r.true_eye_mm.x()) << ',' << format(r.true_eye_mm.y()) << ','
           << format(r.true_eye_mm.z()) << ',';
        // target:error pairs, ';'-separated
        for (std::size_t i = 0; i < r.errors.size(); ++i)
            os << (i ? ";" : "") << r.errors[i].target << ':' << format(r.errors[i].error_mm);
        os << ',' << format(r.tracking_charge_ms) << ',' << format(r.cumulative_tracking_ms) << ','
           << format(r.frame_time_ms) << '\n';
    }
}

std::string summary_csv_header(const ExperimentConfig& config)
{
    std::string h = "mode,mean_error_mm,sd_error_mm,invocations,invocation_fraction,"
                    "total_tracking_ms,mean_frame_time_ms";
    if (config.px_per_mm)
        h += ",mean_error_px,sd_error_px";
    return h;
}

void write_summary_row(std::ostream& os, const ModeSummary& s, const ExperimentConfig& config)
{
    using csv::format;
    os << to_string(s.mode) << ',' << format(s.mean_error_mm) << ',' << format(s.sd_error_mm) << ','
       << s.invocations << ',' << format(s.invocation_fraction) << ',' << format(s.total_tracking_ms)
       << ',' << format(s.mean_frame_time_ms);
    if (config.px_per_mm)
        os << ',' << format(s.mean_error_mm * *config.px_per_mm) << ','
           << format(s.sd_error_mm * *config.px_per_mm);
}

void write_summary_csv(std::ostream& os, const RunResult& result, const ExperimentConfig& config)
{
    os << summary_csv_header(config) << '\n';
    for (const auto& r : result.runs) {
        write_summary_row(os, r.summary, config);
        os << '\n';
    }
}

void write_sweep_csv(std::ostream& os, SweepParam p, const std::vector<SweepRow>& rows,
                     const ExperimentConfig& config)
{
    os << "param,value," << summary_csv_header(config) << '\n';
    for (const auto& row : rows)
        for (const auto& s : row.summaries) {
            os << to_string(p) << ',' << csv::format(row.value) << ',';
            write_summary_row(os, s, config);
            os << '\n';
        }
}

RunResult write_simulation(const ExperimentConfig& config, const std::filesystem::path& out_dir)
{
    RunResult result = run(config);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

    auto open = [&](const std::string& name) {
        std::ofstream os(out_dir / name, std::ios::binary);
        if (!os)
            throw ConfigError("cannot write '" + (out_dir / name).string() + "'");
        return os;
    };
    for (const auto& r : result.runs) {
        auto os = open("frames_" + std::string(to_string(r.summary.mode)) + ".csv");
        write_frames_csv(os, r);
    }
    auto os = open("summary.csv");
    write_summary_csv(os, result, config);
    return result;
}

}  // namespace magiclens
