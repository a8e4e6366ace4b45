#pragma once

// Synthetic sensing stack: head-motion traces, an image-space eye tracker
// standing in for sparse optical flow, a noisy and costed 3D face tracker,
// and the compute-cost model.

#include "magiclens/geometry.hpp"
#include "magiclens/scheduler.hpp"

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

namespace magiclens {

// ---------------------------------------------------------------------------
// Traces

enum class TraceGenerator { stationary, step_move, sway, random_walk };

std::string_view to_string(TraceGenerator g);
TraceGenerator parse_trace_generator(std::string_view s);

/// One front-camera frame of ground truth. The device pose is stored as a
/// quaternion + translation so that CSV round trips are exact.
struct TraceFrame {
    std::int64_t index = 0;
    double t_ms = 0.0;
    Vec3 eye_mm = Vec3::Zero();  // cyclopean eye, display frame
    double ipd_mm = 63.0;
    Quat device_rotation = Quat::Identity();  // display -> world
    Vec3 device_translation_mm = Vec3::Zero();

    EyeState true_eye() const { return EyeState::from_cyclopean(eye_mm, ipd_mm); }
    RigidTransform device_pose() const
    {
        return RigidTransform::from_quaternion(device_rotation, device_translation_mm);
    }
    bool operator==(const TraceFrame& o) const;
};

struct HeadTrace {
    std::vector<TraceFrame> frames;
    double rate_hz = 15.0;
    TraceGenerator generator = TraceGenerator::stationary;

    std::size_t size() const { return frames.size(); }
};

struct TraceSpec {
    TraceGenerator generator = TraceGenerator::stationary;
    std::int64_t frames = 100;  // ignored by step_move (derived from segments)
    double rate_hz = 15.0;
    std::uint64_t seed = 1;
    Vec3 start_eye_mm{0, 0, 300};
    double ipd_mm = 63.0;

    // step_move: alternating dwell segments at start and start + displacement
    std::int64_t dwell_frames = 50;
    std::int64_t transition_frames = 20;
    std::int64_t dwell_segments = 2;
    Vec3 displacement_mm{200, 0, 0};

    // sway: start + amplitude * sin(2 pi k / period)
    Vec3 amplitude_mm{40, 10, 20};
    double period_frames = 90.0;

    // random_walk: Gaussian step per axis, z kept above min_eye_z_mm
    double step_sigma_mm = 2.0;
    double min_eye_z_mm = 50.0;

    Quat device_rotation = Quat::Identity();
    Vec3 device_translation_mm = Vec3::Zero();

    /// Throws InvalidArgument naming the offending field.
    void validate() const;
    std::int64_t frame_count() const;
};

HeadTrace generate_trace(const TraceSpec& spec);

/// Two dwell positions 250 mm apart laterally and 100 mm apart in depth,
/// 150 dwell frames each, joined by a 30-frame transition.
TraceSpec large_workspace_trace_spec();

/// A frame is a dwell frame if its eye and device pose match the previous
/// frame within tol_mm (frame 0 is compared against frame 1).
std::vector<bool> dwell_mask(const HeadTrace& trace, double tol_mm = 0.5);

inline constexpr std::string_view kTraceCsvHeader =
    "frame,t_ms,eye_x_mm,eye_y_mm,eye_z_mm,ipd_mm,dev_qw,dev_qx,dev_qy,dev_qz,"
    "dev_tx_mm,dev_ty_mm,dev_tz_mm";

void write_trace_csv(std::ostream& os, const HeadTrace& trace);
/// Throws std::runtime_error with the offending line number on malformed input.
HeadTrace read_trace_csv(std::istream& is);

// ---------------------------------------------------------------------------
// Image-space eye tracking proxy

struct FlowNoise {
    double sigma_px = 0.5;
    double drift_px_per_frame = 0.05;
    double p_fail = 0.001;

    void validate() const;
};

struct FlowMeasurement {
    FlowObservation eye_px;  // nullopt: tracker lost the eyes
    double noise_sigma_px = 0.0;
    double drift_px_per_frame = 0.0;
    Vec2 drift_offset_px = Vec2::Zero();
};

/// Exact front-camera projection of both eyes, or nullopt if either is
/// behind the camera or (when require_in_image) outside the image.
std::optional<EyePair> project_eyes(const PinholeCamera& front_cam, const EyeState& eyes,
                                    bool require_in_image = true);

/// Draws from its own generator in a fixed order per call, so the random
/// sequence does not depend on measurement outcomes.
class FlowTrackerProxy {
public:
    FlowTrackerProxy(FlowNoise noise, std::uint64_t seed);

    FlowMeasurement measure(const PinholeCamera& front_cam, const EyeState& true_eye);
    /// Re-initializes tracking: accumulated drift returns to zero.
    void reset_drift();

    const FlowNoise& noise() const { return noise_; }

private:
    FlowNoise noise_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    Vec2 drift_dir_ = Vec2::UnitX();
    Vec2 drift_ = Vec2::Zero();
};

// ---------------------------------------------------------------------------
// 3D face tracker proxy

struct FaceTrackerParams {
    double jitter_sigma_mm = 5.0;
    std::int64_t latency_frames = 1;
    double cost_ms = 30.094;
    double max_rate_hz = 15.0;

    void validate() const;
};

class RateCeilingViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct FaceTrackResult {
    EyeState estimate;
    double charge_ms;
    std::int64_t requested_frame;
    std::int64_t ready_frame;  // first frame at which the estimate may be used
};

using Nanoseconds = std::chrono::duration<std::int64_t, std::nano>;

Nanoseconds ms_to_ns(double ms);
double ns_to_ms(Nanoseconds ns);

class FaceTrackerProxy {
public:
    FaceTrackerProxy(FaceTrackerParams params, std::uint64_t seed);

    /// Throws RateCeilingViolation if invoked faster than max_rate_hz.
    FaceTrackResult track(const EyeState& true_eye, std::int64_t frame, double t_ms);

    std::int64_t invocations() const { return invocations_; }
    Nanoseconds total_charge() const { return total_; }
    double total_charge_ms() const { return ns_to_ms(total_); }
    const FaceTrackerParams& params() const { return params_; }

private:
    FaceTrackerParams params_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
    std::int64_t invocations_ = 0;
    Nanoseconds total_{0};
    std::optional<double> last_t_ms_;
};

// ---------------------------------------------------------------------------
// Cost model

struct CostModel {
    /// Face-tracking cost per invocation keyed by front-camera resolution.
    std::map<std::pair<int, int>, double> face_track_ms{{{320, 240}, 14.080}, {{640, 480}, 30.094}};
    double flow_ms = 0.3;
    double render_base_ms = 20.733;
    /// Fraction of a tracking charge that lands on the render frame (the
    /// tracker runs on its own thread); fitted from the reference timings.
    double tracking_frame_share = 0.658;

    double face_track_ms_for(int width_px, int height_px) const;
    void validate() const;
};

/// splitmix64, used to derive independent stream seeds from one run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace magiclens
