#include "magiclens/tracksim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace magiclens {

std::string_view to_string(TraceGenerator g)
{
    switch (g) {
    case TraceGenerator::stationary: return "stationary";
    case TraceGenerator::step_move: return "step_move";
    case TraceGenerator::sway: return "sway";
    case TraceGenerator::random_walk: return "random_walk";
    }
    return "?";
}

TraceGenerator parse_trace_generator(std::string_view s)
{
    for (auto g : {TraceGenerator::stationary, TraceGenerator::step_move, TraceGenerator::sway,
                   TraceGenerator::random_walk})
        if (s == to_string(g))
            return g;
    throw InvalidArgument("unknown trace generator '" + std::string(s) + "'");
}

bool TraceFrame::operator==(const TraceFrame& o) const
{
    return index == o.index && t_ms == o.t_ms && eye_mm == o.eye_mm && ipd_mm == o.ipd_mm &&
           device_rotation.coeffs() == o.device_rotation.coeffs() &&
           device_translation_mm == o.device_translation_mm;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------

void TraceSpec::validate() const
{
    if (!(rate_hz > 0) || !std::isfinite(rate_hz))
        throw InvalidArgument("trace.rate_hz must be > 0");
    if (!start_eye_mm.allFinite() || !(start_eye_mm.z() > 0))
        throw InvalidArgument("trace.start_eye_mm must be finite with z > 0");
    if (!(ipd_mm >= 0))
        throw InvalidArgument("trace.ipd_mm must be >= 0");
    if (!(device_rotation.norm() > 0))
        throw InvalidArgument("trace.device_rotation must be a non-zero quaternion");
    switch (generator) {
    case TraceGenerator::step_move:
        if (dwell_frames <= 0)
            throw InvalidArgument("trace.dwell_frames must be > 0");
        if (transition_frames < 0)
            throw InvalidArgument("trace.transition_frames must be >= 0");
        if (dwell_segments < 2)
            throw InvalidArgument("trace.dwell_segments must be >= 2");
        if (!((start_eye_mm + displacement_mm).z() > 0))
            throw InvalidArgument("trace.displacement_mm moves the eye behind the display");
        break;
    case TraceGenerator::sway:
        if (frames <= 0)
            throw InvalidArgument("trace.frames must be > 0");
        if (!(period_frames > 0))
            throw InvalidArgument("trace.period_frames must be > 0");
        if (!(start_eye_mm.z() - std::abs(amplitude_mm.z()) > 0))
            throw InvalidArgument("trace.amplitude_mm moves the eye behind the display");
        break;
    case TraceGenerator::random_walk:
        if (frames <= 0)
            throw InvalidArgument("trace.frames must be > 0");
        if (!(step_sigma_mm >= 0))
            throw InvalidArgument("trace.step_sigma_mm must be >= 0");
        if (!(min_eye_z_mm > 0))
            throw InvalidArgument("trace.min_eye_z_mm must be > 0");
        break;
    case TraceGenerator::stationary:
        if (frames <= 0)
            throw InvalidArgument("trace.frames must be > 0");
        break;
    }
}

std::int64_t TraceSpec::frame_count() const
{
    if (generator == TraceGenerator::step_move)
        return dwell_segments * dwell_frames + (dwell_segments - 1) * transition_frames;
    return frames;
}

HeadTrace generate_trace(const TraceSpec& spec)
{
    spec.validate();
    HeadTrace trace;
    trace.rate_hz = spec.rate_hz;
    trace.generator = spec.generator;
    const std::int64_t n = spec.frame_count();
    trace.frames.reserve(static_cast<std::size_t>(n));

    const double dt = 1000.0 / spec.rate_hz;
    const Quat q = spec.device_rotation.normalized();
    std::mt19937_64 rng(derive_seed(spec.seed, 0));
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto eye_at = [&](std::int64_t k, const Vec3& prev) -> Vec3 {
        switch (spec.generator) {
        case TraceGenerator::stationary: return spec.start_eye_mm;
        case TraceGenerator::sway:
            return spec.start_eye_mm +
                   spec.amplitude_mm * std::sin(2 * kPi * static_cast<double>(k) / spec.period_frames);
        case TraceGenerator::random_walk: {
            if (k == 0)
                return spec.start_eye_mm;
            Vec3 step;
            for (int i = 0; i < 3; ++i)
                step[i] = spec.step_sigma_mm * gauss(rng);
            Vec3 e = prev + step;
            e.z() = std::max(e.z(), spec.min_eye_z_mm);
            return e;
        }
        case TraceGenerator::step_move: {
            const std::int64_t cycle = spec.dwell_frames + spec.transition_frames;
            const std::int64_t seg = k / cycle;
            const std::int64_t in = k % cycle;
            const Vec3 a = seg % 2 == 0 ? spec.start_eye_mm : spec.start_eye_mm + spec.displacement_mm;
            const Vec3 b = seg % 2 == 0 ? spec.start_eye_mm + spec.displacement_mm : spec.start_eye_mm;
            if (in < spec.dwell_frames)
                return a;
            const double s = static_cast<double>(in - spec.dwell_frames + 1) /
                             static_cast<double>(spec.transition_frames + 1);
            const double eased = 0.5 - 0.5 * std::cos(kPi * s);
            return a + eased * (b - a);
        }
        }
        return spec.start_eye_mm;
    };

    Vec3 eye = spec.start_eye_mm;
    for (std::int64_t k = 0; k < n; ++k) {
        eye = eye_at(k, eye);
        TraceFrame f;
        f.index = k;
        f.t_ms = static_cast<double>(k) * dt;
        f.eye_mm = eye;
        f.ipd_mm = spec.ipd_mm;
        f.device_rotation = q;
        f.device_translation_mm = spec.device_translation_mm;
        trace.frames.push_back(f);
    }
    return trace;
}

TraceSpec large_workspace_trace_spec()
{
    TraceSpec s;
    s.generator = TraceGenerator::step_move;
    s.rate_hz = 15.0;
    s.dwell_frames = 150;
    s.transition_frames = 30;
    s.dwell_segments = 2;
    s.start_eye_mm = {-125, 0, 250};
    s.displacement_mm = {250, 0, 100};
    s.ipd_mm = 63.0;
    s.device_translation_mm = {0, 0, 200};
    return s;
}

std::vector<bool> dwell_mask(const HeadTrace& trace, double tol_mm)
{
    const auto& f = trace.frames;
    std::vector<bool> mask(f.size(), true);
    auto same = [&](const TraceFrame& a, const TraceFrame& b) {
        return (a.eye_mm - b.eye_mm).norm() <= tol_mm &&
               (a.device_translation_mm - b.device_translation_mm).norm() <= tol_mm &&
               a.device_rotation.angularDistance(b.device_rotation) <= 1e-6;
    };
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (k > 0)
            mask[k] = same(f[k], f[k - 1]);
        else if (f.size() > 1)
            mask[k] = same(f[0], f[1]);
    }
    return mask;
}

// ---------------------------------------------------------------------------

void FlowNoise::validate() const
{
    if (!(sigma_px >= 0))
        throw InvalidArgument("flow.noise_sigma_px must be >= 0");
    if (!(drift_px_per_frame >= 0))
        throw InvalidArgument("flow.drift_px_per_frame must be >= 0");
    if (!(p_fail >= 0 && p_fail <= 1))
        throw InvalidArgument("flow.p_fail must be in [0, 1]");
}

std::optional<EyePair> project_eyes(const PinholeCamera& cam, const EyeState& eyes,
                                    bool require_in_image)
{
    EyePair out;
    const Vec3* pts[2] = {&eyes.left(), &eyes.right()};
    for (int i = 0; i < 2; ++i) {
        const Vec3 p = cam.extrinsic().apply(*pts[i]);
        if (!(p.z() > 0))
            return std::nullopt;
        out[i] = project_pinhole(cam, p);
        if (require_in_image && !cam.contains_px(out[i]))
            return std::nullopt;
    }
    return out;
}

FlowTrackerProxy::FlowTrackerProxy(FlowNoise noise, std::uint64_t seed)
    : noise_(noise), rng_(seed)
{
    noise_.validate();
    reset_drift();
}

void FlowTrackerProxy::reset_drift()
{
    const double angle = 2 * kPi * uniform_(rng_);
    drift_dir_ = {std::cos(angle), std::sin(angle)};
    drift_ = Vec2::Zero();
}

FlowMeasurement FlowTrackerProxy::measure(const PinholeCamera& cam, const EyeState& eye)
{
    // Fixed draw order: failure test, then four Gaussian components.
    const double u = uniform_(rng_);
    Vec2 n0, n1;
    n0 << gauss_(rng_), gauss_(rng_);
    n1 << gauss_(rng_), gauss_(rng_);
    drift_ += noise_.drift_px_per_frame * drift_dir_;

    FlowMeasurement m;
    m.noise_sigma_px = noise_.sigma_px;
    m.drift_px_per_frame = noise_.drift_px_per_frame;
    m.drift_offset_px = drift_;
    if (u < noise_.p_fail)
        return m;
    const auto exact = project_eyes(cam, eye);
    if (!exact)
        return m;
    EyePair px = *exact;
    px[0] += drift_ + noise_.sigma_px * n0;
    px[1] += drift_ + noise_.sigma_px * n1;
    m.eye_px = px;
    return m;
}

// ---------------------------------------------------------------------------

void FaceTrackerParams::validate() const
{
    if (!(jitter_sigma_mm >= 0))
        throw InvalidArgument("face.jitter_sigma_mm must be >= 0");
    if (latency_frames < 0)
        throw InvalidArgument("face.latency_frames must be >= 0");
    if (!(cost_ms >= 0))
        throw InvalidArgument("face.cost_ms must be >= 0");
    if (!(max_rate_hz > 0))
        throw InvalidArgument("face.max_rate_hz must be > 0");
}

Nanoseconds ms_to_ns(double ms) { return Nanoseconds(std::llround(ms * 1e6)); }

double ns_to_ms(Nanoseconds ns) { return static_cast<double>(ns.count()) / 1e6; }

FaceTrackerProxy::FaceTrackerProxy(FaceTrackerParams params, std::uint64_t seed)
    : params_(params), rng_(seed)
{
    params_.validate();
}

FaceTrackResult FaceTrackerProxy::track(const EyeState& true_eye, std::int64_t frame,
                                        double t_ms)
{
    const double min_interval = 1000.0 / params_.max_rate_hz;
    if (last_t_ms_ && t_ms - *last_t_ms_ < min_interval - 1e-6)
        throw RateCeilingViolation("face tracker invoked above " +
                                   std::to_string(params_.max_rate_hz) + " Hz at frame " +
                                   std::to_string(frame));
    last_t_ms_ = t_ms;

    Vec3 offset;
    for (int i = 0; i < 3; ++i)
        offset[i] = params_.jitter_sigma_mm * gauss_(rng_);
    Vec3 moved = true_eye.cyclopean() + offset;
    // A jitter sample that would put the head behind the panel is clamped.
    if (!(moved.z() > 1.0))
        offset.z() += 1.0 - moved.z();

    ++invocations_;
    const Nanoseconds charge = ms_to_ns(params_.cost_ms);
    total_ += charge;
    return {true_eye.displaced(offset), ns_to_ms(charge), frame, frame + params_.latency_frames};
}

// ---------------------------------------------------------------------------

double CostModel::face_track_ms_for(int w, int h) const
{
    const auto it = face_track_ms.find({w, h});
    if (it == face_track_ms.end())
        throw InvalidArgument("cost model has no face-tracking tier for " + std::to_string(w) +
                              "x" + std::to_string(h));
    return it->second;
}

void CostModel::validate() const
{
    for (const auto& [res, ms] : face_track_ms)
        if (!(ms >= 0))
            throw InvalidArgument("cost.face_track_ms must be >= 0");
    if (!(flow_ms >= 0))
        throw InvalidArgument("cost.flow_ms must be >= 0");
    if (!(render_base_ms >= 0))
        throw InvalidArgument("cost.render_base_ms must be >= 0");
    if (!(tracking_frame_share >= 0 && tracking_frame_share <= 1))
        throw InvalidArgument("cost.tracking_frame_share must be in [0, 1]");
    const auto lo = face_track_ms.find({320, 240});
    const auto hi = face_track_ms.find({640, 480});
    if (lo != face_track_ms.end() && hi != face_track_ms.end() && !(hi->second > lo->second))
        throw InvalidArgument("cost.face_track_ms_640x480 must exceed cost.face_track_ms_320x240");
}

}  // namespace magiclens
