#pragma once

// Gradient-ascent drivers over a caller-supplied objective.
//
// Projected mode, per iteration:
//   clip g elementwise -> (optionally) project g onto the feasible set ->
//   Adam increment -> project the iterate onto the feasible set.
// The starting point is projected first (unless already feasible), so every
// recorded iterate is feasible. Adam moment buffers are never projected.

#include "wgn/block_projection.hpp"
#include "wgn/error.hpp"
#include "wgn/feasible_set.hpp"
#include "wgn/random.hpp"
#include "wgn/regularizers.hpp"
#include "wgn/spectral_map.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wgn {

using Evaluation = LossEvaluation;

/// evaluate(x) returns the objective value and its gradient (same length as x).
template <class T>
concept Objective = requires(T& objective, const LatentVector& x) {
    { objective.evaluate(x) } -> std::convertible_to<Evaluation>;
};

enum class OptimizerMode { projected, regularized, unconstrained };

struct OptimizerConfig {
    double step_size = 0.02;
    std::size_t iterations = 200;
    double clip_threshold = 0.03;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    bool project_gradient = true;
    OptimizerMode mode = OptimizerMode::projected;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (!(step_size > 0.0) || !std::isfinite(step_size)) throw ValidationError("step size must be > 0");
        if (iterations < 1) throw ValidationError("iterations must be >= 1");
        if (!(clip_threshold > 0.0)) throw ValidationError("clip threshold must be > 0");
        if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw ValidationError("adam beta1 must lie in [0, 1)");
        if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw ValidationError("adam beta2 must lie in [0, 1)");
        if (!(adam_epsilon > 0.0)) throw ValidationError("adam epsilon must be > 0");
    }
};

struct IterationRecord {
    std::size_t iteration = 0;
    double value = 0.0;
    double norm_sq = 0.0;
    double max_residual = 0.0;
    double cos_to_init = 0.0;
};

struct Trajectory {
    std::vector<IterationRecord> records;
    LatentVector final_latent;
};

/// Thrown when the objective returns a non-finite value or gradient, or
/// |J| > 1e12. Carries everything recorded up to the failure.
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, Trajectory partial)
        : NumericalError(what), partial_(std::move(partial))
    {
    }
    const Trajectory& partial() const noexcept { return partial_; }

private:
    Trajectory partial_;
};

inline constexpr double kDivergenceLimit = 1e12;

// Relative blockwise residual below which projected_ascent keeps x0 as is.
inline constexpr double kFeasibleStartTolerance = 1e-12;

struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState(std::size_t n, double b1 = 0.9, double b2 = 0.999, double eps = 1e-8)
        : first_moment(n, 0.0), second_moment(n, 0.0), beta1(b1), beta2(b2), epsilon(eps)
    {
    }
};

/// Advances the moments by one bias-corrected Adam update and returns the
/// increment eta * mhat / (sqrt(vhat) + eps). Ascent adds it; descent subtracts.
inline std::vector<double> adam_step(AdamState& state, std::span<const double> gradient, double step_size)
{
    if (gradient.size() != state.first_moment.size())
        throw DimensionError("gradient length does not match optimizer state");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);

    std::vector<double> increment(gradient.size());
    for (std::size_t i = 0; i < gradient.size(); ++i) {
        double& m = state.first_moment[i];
        double& v = state.second_moment[i];
        m = state.beta1 * m + (1.0 - state.beta1) * gradient[i];
        v = state.beta2 * v + (1.0 - state.beta2) * gradient[i] * gradient[i];
        increment[i] = step_size * (m / correction1) / (std::sqrt(v / correction2) + state.epsilon);
    }
    return increment;
}

inline void clip_elementwise(std::span<double> g, double threshold) noexcept
{
    for (double& v : g) v = std::clamp(v, -threshold, threshold);
}

namespace detail {

inline IterationRecord make_record(std::size_t iteration, double value, const LatentVector& x,
                                   std::span<const double> init, const BlockLayout& layout)
{
    IterationRecord r;
    r.iteration = iteration;
    r.value = value;
    r.norm_sq = dot(x.values(), x.values());
    r.max_residual = feasibility_residuals(x, layout).max();
    const double denom = std::sqrt(r.norm_sq * dot(init, init));
    r.cos_to_init = denom > 0.0 ? dot(x.values(), init) / denom : 0.0;
    return r;
}

inline bool finite_values(std::span<const double> v) noexcept { return all_finite(v); }

// Shared loop. direction(ev, x, i) turns the raw objective gradient into
// the ascent direction; settle(candidate, i) maps the stepped point to the
// next iterate.
template <Objective Obj, class Direction, class Settle>
Trajectory run_ascent(Obj& objective, LatentVector x, const LatentVector& x0, const BlockLayout& layout,
                      const OptimizerConfig& cfg, Direction direction, Settle settle)
{
    Trajectory traj{{}, x};
    traj.records.reserve(cfg.iterations + 1);
    AdamState adam(x.size(), cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon);

    for (std::size_t i = 0;; ++i) {
        Evaluation ev = objective.evaluate(x);
        if (!std::isfinite(ev.value) || std::abs(ev.value) > kDivergenceLimit || ev.gradient.size() != x.size() ||
            !finite_values(ev.gradient)) {
            traj.final_latent = x;
            throw DivergenceError("objective diverged at iteration " + std::to_string(i), std::move(traj));
        }
        traj.records.push_back(make_record(i, ev.value, x, x0.values(), layout));
        if (i == cfg.iterations) break;

        std::vector<double> g = direction(ev, x, i);
        const std::vector<double> step = adam_step(adam, g, cfg.step_size);
        std::vector<double> next = x.vector();
        for (std::size_t j = 0; j < next.size(); ++j) next[j] += step[j];
        x = settle(std::move(next), i);
    }
    traj.final_latent = std::move(x);
    return traj;
}

} // namespace detail

// Seed streams: 0 for the initial projection, 2i+1 for the gradient
// projection at step i, 2i+2 for the iterate projection at step i.
template <Objective Obj>
Trajectory projected_ascent(Obj& objective, const LatentVector& x0, const BlockLayout& layout,
                            const OptimizerConfig& cfg)
{
    cfg.validate();
    detail::require_layout(x0.size(), layout);
    // An already-feasible start is kept bit-for-bit, so runs that share x0
    // also share their iteration-0 record.
    LatentVector start = feasibility_residuals(x0, layout).max() <= kFeasibleStartTolerance * layout.l2sq_target()
                             ? x0
                             : project_to_feasible(x0, layout, derive_seed(cfg.seed, 0)).output;

    auto direction = [&](Evaluation& ev, const LatentVector&, std::size_t i) {
        std::vector<double> g = std::move(ev.gradient);
        clip_elementwise(g, cfg.clip_threshold);
        // A zero gradient carries no direction; projecting it would invent one.
        const bool zero = std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; });
        if (cfg.project_gradient && !zero)
            g = project_to_feasible(LatentVector(std::move(g)), layout, derive_seed(cfg.seed, 2 * i + 1))
                    .output.vector();
        return g;
    };
    auto settle = [&](std::vector<double> candidate, std::size_t i) {
        return project_to_feasible(LatentVector(std::move(candidate)), layout, derive_seed(cfg.seed, 2 * i + 2))
            .output;
    };
    return detail::run_ascent(objective, std::move(start), x0, layout, cfg, direction, settle);
}

/// Gradient ascent on r - lambda * L_reg without projection. Feasibility
/// residuals are still recorded for comparison.
template <Objective Obj>
Trajectory regularized_ascent(Obj& objective, const RegularizerSpec& spec, const LatentVector& x0,
                              const BlockLayout& layout, const OptimizerConfig& cfg)
{
    cfg.validate();
    detail::require_layout(x0.size(), layout);

    auto direction = [&](Evaluation& ev, const LatentVector& x, std::size_t) {
        std::vector<double> g = combined_gradient(ev.gradient, x, spec, layout);
        clip_elementwise(g, cfg.clip_threshold);
        return g;
    };
    auto settle = [](std::vector<double> candidate, std::size_t) { return LatentVector(std::move(candidate)); };
    return detail::run_ascent(objective, x0, x0, layout, cfg, direction, settle);
}

template <Objective Obj>
Trajectory unconstrained_ascent(Obj& objective, const LatentVector& x0, const BlockLayout& layout,
                                const OptimizerConfig& cfg)
{
    return regularized_ascent(objective, RegularizerSpec{RegularizerKind::norm_chi, 0.0, Weighting::fixed}, x0,
                              layout, cfg);
}

/// Dispatches on cfg.mode; `spec` is required for regularized mode.
template <Objective Obj>
Trajectory optimize(Obj& objective, const LatentVector& x0, const BlockLayout& layout, const OptimizerConfig& cfg,
                    const std::optional<RegularizerSpec>& spec = std::nullopt)
{
    switch (cfg.mode) {
    case OptimizerMode::projected: return projected_ascent(objective, x0, layout, cfg);
    case OptimizerMode::unconstrained: return unconstrained_ascent(objective, x0, layout, cfg);
    case OptimizerMode::regularized:
        if (!spec) throw ValidationError("regularized mode requires a regularizer spec");
        return regularized_ascent(objective, *spec, x0, layout, cfg);
    }
    throw ValidationError("unknown optimizer mode");
}

} // namespace wgn
