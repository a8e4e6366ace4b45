#pragma once

// Closed-loop experiment runner: drives a head trace through each render
// mode's tracking pipeline, charges compute time, and measures pointing
// error against a target set on the scene plane.
//
// Pipelines per front-camera frame:
//   UPR    face tracker on every frame;
//   AAUPR  flow measurement on every frame, face tracker only when the
//          scheduler says Recalculate;
//   FUPR   fixed calibration eye, no tracking;
//   DPR    back-camera view, no eyes at all.
//
// Time accounting. A face-tracking result requested at frame k becomes
// usable at frame k + latency. Its cost is charged to that arrival frame
// (or to the last frame if the trace ends first), so
//   cumulative_tracking_ms = sum of charges up to and including the frame
//   frame_time_ms = render_base_ms + flow_ms [AAUPR only]
//                   + tracking_frame_share * tracking_charge_ms
// Charges are accumulated in integer nanoseconds, so totals are exact.

#include "magiclens/geometry.hpp"
#include "magiclens/scheduler.hpp"
#include "magiclens/tracksim.hpp"
#include "magiclens/viewgen.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace magiclens {

enum class EvalFrames { dwell, all };

std::string_view to_string(EvalFrames e);
EvalFrames parse_eval_frames(std::string_view s);

struct ExperimentConfig {
    std::vector<RenderMode> modes{RenderMode::DPR, RenderMode::UPR, RenderMode::FUPR,
                                  RenderMode::AAUPR};
    std::uint64_t seed = 1;

    TraceSpec trace = large_workspace_trace_spec();
    std::string trace_file;  // when set, replaces the generated trace
    /// Lateral (display x) offset added to every trace frame's eye.
    double head_offset_mm = 0.0;

    double display_width_mm = 109.0;
    double display_height_mm = 61.0;
    int display_width_px = 1920;
    int display_height_px = 1080;

    Vec3 plane_point_mm{0, 0, 0};
    Vec3 plane_normal{0, 0, 1};
    Vec3 plane_u_axis{1, 0, 0};
    double plane_width_mm = 506.0;
    double plane_height_mm = 287.0;

    CameraIntrinsics front_cam{380, 380, 320, 240, 640, 480};
    Vec3 front_cam_position_mm{0, 36, 0};
    CameraIntrinsics back_cam{500, 500, 320, 240, 640, 480};
    Vec3 back_cam_position_mm{-40, 20, 0};
    FitPolicy dpr_fit = FitPolicy::stretch;

    FuprCalibration fupr;

    ThresholdConfig scheduler;
    /// When true, eps_max = 3% of the front image diagonal and eps_min = 0.1 eps_max.
    bool eps_auto = true;

    FlowNoise flow;
    FaceTrackerParams face;
    /// When unset, face-tracking cost comes from the cost model tier
    /// matching the front camera resolution.
    std::optional<double> face_cost_ms;
    CostModel cost;

    std::vector<Vec2> targets;  // plane coordinates, mm; empty -> grid
    int target_grid_x = 9;
    int target_grid_y = 5;
    double target_margin_mm = 40.0;
    double target_radius_mm = 20.0;

    EvalFrames eval_frames = EvalFrames::dwell;
    double dwell_tol_mm = 0.5;
    std::optional<double> px_per_mm;

    /// Throws ConfigError naming the offending key.
    void validate() const;

    DisplayModel display(const RigidTransform& pose = {}) const;
    PinholeCamera front_camera() const;
    PinholeCamera back_camera() const;
    ScenePlane plane() const;
    ThresholdConfig threshold_config() const;
    FaceTrackerParams face_params() const;
    std::vector<Vec2> target_points() const;
    HeadTrace load_trace() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TargetError {
    int target = 0;
    double error_mm = 0.0;  // NaN: a ray missed (no-hit)
};

struct FrameRecord {
    std::int64_t frame = 0;
    RenderMode mode = RenderMode::UPR;
    std::optional<Decision> decision;  // AAUPR only
    std::optional<Vec3> estimated_eye_mm;
    Vec3 true_eye_mm = Vec3::Zero();
    std::vector<TargetError> errors;
    double tracking_charge_ms = 0.0;
    double cumulative_tracking_ms = 0.0;
    double frame_time_ms = 0.0;
};

struct ModeSummary {
    RenderMode mode = RenderMode::UPR;
    double mean_error_mm = 0.0;
    double sd_error_mm = 0.0;
    std::int64_t error_samples = 0;
    std::int64_t invocations = 0;
    double invocation_fraction = 0.0;
    double total_tracking_ms = 0.0;
    double mean_frame_time_ms = 0.0;
    std::int64_t frames = 0;
};

struct ModeRun {
    std::vector<FrameRecord> frames;
    ModeSummary summary;
};

struct RunResult {
    std::vector<ModeRun> runs;  // same order as config.modes

    const ModeRun& of(RenderMode m) const;
    const ModeSummary& summary(RenderMode m) const { return of(m).summary; }
};

ModeRun run_mode(const ExperimentConfig& config, const HeadTrace& trace, RenderMode mode);
RunResult run(const ExperimentConfig& config);

// ---------------------------------------------------------------------------

enum class SweepParam { eps_max, jitter_sigma, head_displacement };

std::string_view to_string(SweepParam p);
SweepParam parse_sweep_param(std::string_view s);

/// Copy of base with one parameter overridden.
ExperimentConfig with_param(const ExperimentConfig& base, SweepParam p, double value);

struct SweepRow {
    double value = 0.0;
    std::vector<ModeSummary> summaries;
};

/// One cell per value, each with the base seed. Cells run on OpenMP threads
/// when parallel is true; results are identical either way.
std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepParam p,
                            const std::vector<double>& values, bool parallel = true);

// ---------------------------------------------------------------------------
// CSV output

std::string frame_csv_header();
void write_frames_csv(std::ostream& os, const ModeRun& run);
std::string summary_csv_header(const ExperimentConfig& config);
void write_summary_row(std::ostream& os, const ModeSummary& s, const ExperimentConfig& config);
void write_summary_csv(std::ostream& os, const RunResult& result, const ExperimentConfig& config);
void write_sweep_csv(std::ostream& os, SweepParam p, const std::vector<SweepRow>& rows,
                     const ExperimentConfig& config);

/// Runs the experiment and writes frames_<mode>.csv and summary.csv into out_dir.
RunResult write_simulation(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace magiclens
