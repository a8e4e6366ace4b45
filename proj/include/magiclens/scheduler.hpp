#pragma once

// Dual thresholding: decides, once per front-camera frame, whether the
// expensive 3D head pose must be recomputed or the cheap image-space eye
// tracking is still good enough.
//
// Per frame, with the two flow-tracked eye points:
//   E  = dist(pos_eye_calc,      pos_eye_flow)
//   dE = dist(pos_eye_flow_last, pos_eye_flow)
//   recompute  iff  E > eps  or  (dE < refine_factor * eps  and  !is_precise)
// after which is_precise is set (recompute) or cleared (skip).
//
// Policies:
//   verbatim  - exactly the rule above;
//   latched   - a skip keeps is_precise until E exceeds refine_factor * eps,
//               which removes the every-other-frame refine on a still head;
//   decaying  - verbatim, plus eps shrinks by decay_rate per skip down to
//               eps_min and is restored to eps_max on every recomputation.

#include "magiclens/geometry.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace magiclens {

/// Left and right eye, front-camera pixels.
using EyePair = std::array<Vec2, 2>;

/// A flow measurement; nullopt marks a tracking failure.
using FlowObservation = std::optional<EyePair>;

enum class ThresholdPolicy { verbatim, latched, decaying };
enum class EyeMetric { max, mean };

std::string_view to_string(ThresholdPolicy p);
ThresholdPolicy parse_threshold_policy(std::string_view s);
std::string_view to_string(EyeMetric m);
EyeMetric parse_eye_metric(std::string_view s);

struct ThresholdConfig {
    double eps_max_px = 24.0;
    double refine_factor = 0.1;
    ThresholdPolicy policy = ThresholdPolicy::verbatim;
    double decay_rate = 0.98;
    double eps_min_px = 2.4;
    EyeMetric metric = EyeMetric::max;

    /// Defaults for a front camera: eps_max = 3% of its diagonal,
    /// eps_min = 0.1 eps_max.
    static ThresholdConfig for_camera(const PinholeCamera& front_cam,
                                      ThresholdPolicy policy = ThresholdPolicy::verbatim);

    /// Throws InvalidArgument naming the offending field.
    void validate() const;
};

/// 0.03 * sqrt(width^2 + height^2).
double epsilon_default(const PinholeCamera& front_cam);

double eye_distance(const EyePair& a, const EyePair& b, EyeMetric metric);

enum class DecisionKind { Recalculate, Skip };
enum class DecisionReason { none, spatial, refine, flow_failure, initial };

std::string_view to_string(DecisionKind k);
std::string_view to_string(DecisionReason r);

struct Decision {
    DecisionKind kind = DecisionKind::Skip;
    DecisionReason reason = DecisionReason::none;
    double e_px = 0.0;
    double delta_e_px = 0.0;

    bool recalculate() const { return kind == DecisionKind::Recalculate; }
};

struct SchedulerState {
    EyePair pos_eye_calc{Vec2::Zero(), Vec2::Zero()};
    EyePair pos_eye_flow_last{Vec2::Zero(), Vec2::Zero()};
    bool is_precise = false;
    std::int64_t frames_since_update = 0;
    double eps_current_px = 0.0;
    /// False until the first recomputation has been applied.
    bool bootstrapped = false;
    /// Set by a Recalculate decision, cleared by apply_recalculation.
    bool awaiting_recalculation = false;
    /// Whether pos_eye_flow_last holds a real observation.
    bool has_flow_last = false;

    bool operator==(const SchedulerState&) const = default;
};

/// Raised when apply_recalculation is called without a pending Recalculate.
class SchedulerProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

SchedulerState initial_state(const ThresholdConfig& cfg);

struct StepResult {
    Decision decision;
    SchedulerState state;
};

StepResult step(const SchedulerState& state, const FlowObservation& pos_eye_flow,
                const ThresholdConfig& cfg);

SchedulerState apply_recalculation(const SchedulerState& state, const EyePair& new_eye_px,
                                   const ThresholdConfig& cfg);

/// One scripted scheduler input: a bootstrapped state and the next flow
/// observation, built so that E and dE take the given values.
struct ScriptedStep {
    std::string_view name;
    SchedulerState state;
    FlowObservation flow;
};

/// The five reference inputs for a threshold eps: spatial trigger
/// (E = 1.25 eps), refine trigger, precise skip, plain skip, flow failure.
std::vector<ScriptedStep> scripted_steps(double eps_px);

}  // namespace magiclens
