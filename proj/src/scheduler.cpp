#include "magiclens/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace magiclens {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string_view to_string(ThresholdPolicy p)
{
    switch (p) {
    case ThresholdPolicy::verbatim: return "verbatim";
    case ThresholdPolicy::latched: return "latched";
    case ThresholdPolicy::decaying: return "decaying";
    }
    return "?";
}

ThresholdPolicy parse_threshold_policy(std::string_view s)
{
    for (auto p : {ThresholdPolicy::verbatim, ThresholdPolicy::latched, ThresholdPolicy::decaying})
        if (s == to_string(p))
            return p;
    throw InvalidArgument("unknown threshold policy '" + std::string(s) + "'");
}

std::string_view to_string(EyeMetric m) { return m == EyeMetric::max ? "max" : "mean"; }

EyeMetric parse_eye_metric(std::string_view s)
{
    if (s == "max")
        return EyeMetric::max;
    if (s == "mean")
        return EyeMetric::mean;
    throw InvalidArgument("unknown eye metric '" + std::string(s) + "'");
}

std::string_view to_string(DecisionKind k)
{
    return k == DecisionKind::Recalculate ? "Recalculate" : "Skip";
}

std::string_view to_string(DecisionReason r)
{
    switch (r) {
    case DecisionReason::none: return "none";
    case DecisionReason::spatial: return "spatial";
    case DecisionReason::refine: return "refine";
    case DecisionReason::flow_failure: return "flow_failure";
    case DecisionReason::initial: return "initial";
    }
    return "?";
}

// ---------------------------------------------------------------------------

double epsilon_default(const PinholeCamera& cam)
{
    const double w = cam.width_px(), h = cam.height_px();
    return 0.03 * std::sqrt(w * w + h * h);
}

ThresholdConfig ThresholdConfig::for_camera(const PinholeCamera& front_cam, ThresholdPolicy policy)
{
    ThresholdConfig cfg;
    cfg.eps_max_px = epsilon_default(front_cam);
    cfg.eps_min_px = 0.1 * cfg.eps_max_px;
    cfg.policy = policy;
    return cfg;
}

void ThresholdConfig::validate() const
{
    if (!(eps_max_px > 0))
        throw InvalidArgument("scheduler.eps_max_px must be > 0");
    if (!(refine_factor > 0 && refine_factor < 1))
        throw InvalidArgument("scheduler.refine_factor must be in (0, 1)");
    if (policy == ThresholdPolicy::decaying) {
        if (!(decay_rate > 0 && decay_rate <= 1))
            throw InvalidArgument("scheduler.decay_rate must be in (0, 1]");
        if (!(eps_min_px > 0 && eps_min_px <= eps_max_px))
            throw InvalidArgument("scheduler.eps_min_px must be in (0, eps_max_px]");
    }
}

double eye_distance(const EyePair& a, const EyePair& b, EyeMetric metric)
{
    const double l = (a[0] - b[0]).norm();
    const double r = (a[1] - b[1]).norm();
    return metric == EyeMetric::max ? std::max(l, r) : 0.5 * (l + r);
}

SchedulerState initial_state(const ThresholdConfig& cfg)
{
    cfg.validate();
    SchedulerState s;
    s.eps_current_px = cfg.eps_max_px;
    return s;
}

StepResult step(const SchedulerState& state, const FlowObservation& flow,
                const ThresholdConfig& cfg)
{
    if (state.awaiting_recalculation)
        throw SchedulerProtocolError("step: previous Recalculate decision was never applied");

    SchedulerState next = state;
    Decision d;

    if (!flow) {
        // The last real observation stays as the reference for the next dE.
        d = {DecisionKind::Recalculate, DecisionReason::flow_failure, kNaN, kNaN};
        next.awaiting_recalculation = true;
        return {d, next};
    }

    const EyePair& eyes = *flow;
    d.delta_e_px = state.has_flow_last ? eye_distance(state.pos_eye_flow_last, eyes, cfg.metric)
                                       : kNaN;
    next.pos_eye_flow_last = eyes;
    next.has_flow_last = true;

    if (!state.bootstrapped) {
        d.kind = DecisionKind::Recalculate;
        d.reason = DecisionReason::initial;
        d.e_px = kNaN;
        next.awaiting_recalculation = true;
        return {d, next};
    }

    const double eps = state.eps_current_px;
    const double refine_eps = cfg.refine_factor * eps;
    d.e_px = eye_distance(state.pos_eye_calc, eyes, cfg.metric);

    // NaN delta (no previous observation) never satisfies the refine test.
    if (d.e_px > eps) {
        d.kind = DecisionKind::Recalculate;
        d.reason = DecisionReason::spatial;
    } else if (d.delta_e_px < refine_eps && !state.is_precise) {
        d.kind = DecisionKind::Recalculate;
        d.reason = DecisionReason::refine;
    }

    if (d.recalculate()) {
        next.awaiting_recalculation = true;
        return {d, next};
    }

    ++next.frames_since_update;
    switch (cfg.policy) {
    case ThresholdPolicy::verbatim:
        next.is_precise = false;
        break;
    case ThresholdPolicy::latched:
        if (d.e_px > refine_eps)
            next.is_precise = false;
        break;
    case ThresholdPolicy::decaying:
        next.is_precise = false;
        next.eps_current_px = std::max(cfg.eps_min_px, eps * cfg.decay_rate);
        break;
    }
    return {d, next};
}

SchedulerState apply_recalculation(const SchedulerState& state, const EyePair& new_eye_px,
                                   const ThresholdConfig& cfg)
{
    if (!state.awaiting_recalculation)
        throw SchedulerProtocolError("apply_recalculation: no pending Recalculate decision");
    SchedulerState next = state;
    next.pos_eye_calc = new_eye_px;
    next.is_precise = true;
    next.eps_current_px = cfg.eps_max_px;
    next.frames_since_update = 0;
    next.bootstrapped = true;
    next.awaiting_recalculation = false;
    return next;
}


// ---------------------------------------------------------------------------

std::vector<ScriptedStep> scripted_steps(double eps)
{
    // Both eyes move by the same offset, so E and dE are metric independent.
    const auto make = [eps](std::string_view name, double e, double delta_e, bool precise) {
        SchedulerState s;
        s.pos_eye_calc = {Vec2(300, 240), Vec2(340, 240)};
        const Vec2 d(e, 0), back(delta_e, 0);
        s.pos_eye_flow_last = {s.pos_eye_calc[0] + d - back, s.pos_eye_calc[1] + d - back};
        s.has_flow_last = true;
        s.is_precise = precise;
        s.eps_current_px = eps;
        s.bootstrapped = true;
        return ScriptedStep{name, s, EyePair{s.pos_eye_calc[0] + d, s.pos_eye_calc[1] + d}};
    };
    std::vector<ScriptedStep> out;
    out.push_back(make("spatial", 1.25 * eps, 1.0, true));
    out.push_back(make("refine", 5.0 / 24.0 * eps, 1.0 / 24.0 * eps, false));
    out.push_back(make("precise_skip", 5.0 / 24.0 * eps, 1.0 / 24.0 * eps, true));
    out.push_back(make("plain_skip", 5.0 / 24.0 * eps, 10.0 / 24.0 * eps, false));
    ScriptedStep fail = make("flow_failure", 0.0, 0.0, true);
    fail.flow = std::nullopt;
    out.push_back(fail);
    return out;
}

}  // namespace magiclens
