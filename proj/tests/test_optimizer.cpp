#include "support.hpp"

#include "wgn/optimizer.hpp"
#include "wgn/toy_harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace wgn;
using wgn::test::gaussian;

namespace {

struct ConstantObjective {
    Evaluation evaluate(const LatentVector& x) const { return {3.0, std::vector<double>(x.size(), 0.0)}; }
};

// Value grows geometrically with the iteration count; `nan_at` switches the
// gradient to NaN instead.
struct ExplodingObjective {
    std::size_t calls = 0;
    std::size_t nan_at = std::numeric_limits<std::size_t>::max();
    Evaluation evaluate(const LatentVector& x)
    {
        ++calls;
        Evaluation e{std::pow(1e3, static_cast<double>(calls)), std::vector<double>(x.size(), 1.0)};
        if (calls > nan_at) {
            e.value = 1.0;
            e.gradient[0] = std::numeric_limits<double>::quiet_NaN();
        }
        return e;
    }
};

LatentVector feasible_start(std::size_t n, std::size_t b, std::uint64_t seed)
{
    return project_to_feasible(LatentVector(gaussian(n, seed)), BlockLayout::for_length(n, b), seed).output;
}

OptimizerConfig config(std::size_t iterations, std::uint64_t seed = 0)
{
    OptimizerConfig cfg;
    cfg.iterations = iterations;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST(Adam, MatchesHighPrecisionReferenceTrace)
{
    // Descent on f(x) = x^2 from x = 1, eta = 0.1, default betas and epsilon;
    // reference computed in 40-digit arithmetic.
    const double expected[] = {0.9000000004999999975,  0.80041222869179214524, 0.70158627294602954516,
                               0.6039390605737448393,  0.50796365926434067674, 0.41423645599366060874,
                               0.3234207049391005065,  0.23626372452104057979, 0.15358456007036253631,
                               0.076249155606911102582};
    AdamState state(1);
    double x = 1.0;
    for (double want : expected) {
        const double g = 2.0 * x;
        x -= adam_step(state, std::span<const double>(&g, 1), 0.1)[0];
        EXPECT_NEAR(x, want, 1e-12);
    }
    EXPECT_EQ(state.step, 10u);
}

TEST(Adam, FirstStepIsSignTimesStepSize)
{
    AdamState state(4);
    const std::vector<double> g{2.0, -0.5, 1e-3, 0.0};
    const std::vector<double> inc = adam_step(state, g, 0.02);
    for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_NEAR(inc[i], 0.02 * g[i] / (std::abs(g[i]) + 1e-8), 1e-15);
    EXPECT_EQ(inc[3], 0.0);
}

TEST(Adam, RejectsLengthMismatch)
{
    AdamState state(3);
    EXPECT_THROW(adam_step(state, std::vector<double>(2), 0.1), DimensionError);
}

TEST(ClipElementwise, BoundsEveryEntry)
{
    std::vector<double> g = gaussian(1000, 1, 0.1);
    const std::vector<double> orig = g;
    clip_elementwise(g, 0.03);
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_LE(std::abs(g[i]), 0.03);
        if (std::abs(orig[i]) <= 0.03) EXPECT_EQ(g[i], orig[i]);
        else EXPECT_EQ(g[i], std::copysign(0.03, orig[i]));
    }
}

TEST(OptimizerConfig, Validation)
{
    EXPECT_NO_THROW(OptimizerConfig{}.validate());
    auto bad = [](auto mutate) {
        OptimizerConfig c;
        mutate(c);
        return c;
    };
    EXPECT_THROW(bad([](auto& c) { c.step_size = 0.0; }).validate(), ValidationError);
    EXPECT_THROW(bad([](auto& c) { c.step_size = std::numeric_limits<double>::infinity(); }).validate(), ValidationError);
    EXPECT_THROW(bad([](auto& c) { c.iterations = 0; }).validate(), ValidationError);
    EXPECT_THROW(bad([](auto& c) { c.clip_threshold = -1.0; }).validate(), ValidationError);
    EXPECT_THROW(bad([](auto& c) { c.adam_beta1 = 1.0; }).validate(), ValidationError);
    EXPECT_THROW(bad([](auto& c) { c.adam_beta2 = -0.1; }).validate(), ValidationError);
    EXPECT_THROW(bad([](auto& c) { c.adam_epsilon = 0.0; }).validate(), ValidationError);
}

TEST(ProjectedAscent, ConstantObjectiveLeavesFeasibleStartInPlace)
{
    const BlockLayout layout = BlockLayout::for_length(256, 16);
    const LatentVector x0 = feasible_start(256, 16, 3);
    ConstantObjective objective;
    const Trajectory t = projected_ascent(objective, x0, layout, config(20));
    ASSERT_EQ(t.records.size(), 21u);
    for (std::size_t i = 0; i < x0.size(); ++i) EXPECT_NEAR(t.final_latent[i], x0[i], 1e-9);
    EXPECT_NEAR(t.records.front().cos_to_init, 1.0, 1e-15);
}

TEST(ProjectedAscent, InfeasibleStartIsProjectedFirst)
{
    const BlockLayout layout = BlockLayout::for_length(256, 16);
    ConstantObjective objective;
    const Trajectory t = projected_ascent(objective, LatentVector(gaussian(256, 4, 3.0)), layout, config(1));
    EXPECT_LT(t.records[0].max_residual, 1e-9 * 16);
}

TEST(ProjectedAscent, SpikeRewardApproachesTheMagnitudeBound)
{
    const std::size_t n = 1024;
    const BlockLayout layout = BlockLayout::for_length(n, 16);
    const double ceiling = std::pow(magnitude_bounds(layout).max, 2);
    SpikeReward reward{0};
    const Trajectory t = projected_ascent(reward, feasible_start(n, 16, 1), layout, config(500, 1));
    ASSERT_EQ(t.records.size(), 501u);
    for (std::size_t i = 0; i < t.records.size(); ++i) {
        const IterationRecord& r = t.records[i];
        EXPECT_EQ(r.iteration, i);
        EXPECT_LE(r.value, ceiling + 1e-9);
        EXPECT_LT(r.max_residual, 1e-9 * 16);
        EXPECT_NEAR(r.norm_sq, static_cast<double>(n), 1e-9 * n);
    }
    EXPECT_GE(t.records.back().value, 7.10);
    EXPECT_LE(t.records.back().value, 7.185);
}

TEST(ProjectedAscent, Deterministic)
{
    const BlockLayout layout = BlockLayout::for_length(512, 16);
    SpikeReward reward{3};
    const LatentVector x0 = feasible_start(512, 16, 2);
    const Trajectory a = projected_ascent(reward, x0, layout, config(50, 9));
    const Trajectory b = projected_ascent(reward, x0, layout, config(50, 9));
    EXPECT_EQ(a.final_latent, b.final_latent);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_EQ(a.records[i].value, b.records[i].value);
}

TEST(RegularizedAscent, ZeroCoefficientMatchesUnconstrained)
{
    const BlockLayout layout = BlockLayout::for_length(256, 16);
    SpikeReward reward{2};
    const LatentVector x0 = feasible_start(256, 16, 5);
    const Trajectory a = regularized_ascent(reward, {RegularizerKind::power_spectral, 0.0, Weighting::fixed}, x0,
                                            layout, config(100));
    const Trajectory b = unconstrained_ascent(reward, x0, layout, config(100));
    EXPECT_EQ(a.final_latent, b.final_latent);
}

TEST(RegularizedAscent, UnconstrainedSpikeEscapesTheFeasibleCeiling)
{
    const std::size_t n = 1024;
    const BlockLayout layout = BlockLayout::for_length(n, 16);
    SpikeReward reward{5};
    const Trajectory t = unconstrained_ascent(reward, feasible_start(n, 16, 1), layout, config(1000));
    EXPECT_GT(t.records.back().value, 71.8);
}

TEST(RegularizedAscent, NormChiPenaltyStillExceedsTheCeiling)
{
    const std::size_t n = 1024;
    const BlockLayout layout = BlockLayout::for_length(n, 16);
    SpikeReward reward{5};
    const Trajectory t = regularized_ascent(reward, {RegularizerKind::norm_chi, 2.0, Weighting::fixed},
                                            feasible_start(n, 16, 1), layout, config(1000));
    EXPECT_GT(t.records.back().value, 71.8);
}

TEST(RegularizedAscent, PowerSpectralLeavesResidualsNonzero)
{
    const std::size_t n = 1024;
    const BlockLayout layout = BlockLayout::for_length(n, 16);
    SpikeReward reward{5};
    const Trajectory t = regularized_ascent(reward, {RegularizerKind::power_spectral, 2.0, Weighting::fixed},
                                            feasible_start(n, 16, 1), layout, config(200));
    for (std::size_t i = 1; i < t.records.size(); ++i) EXPECT_GT(t.records[i].max_residual, 1e-9 * 16);
}

TEST(Divergence, LargeValueStopsWithPartialTrajectory)
{
    const BlockLayout layout = BlockLayout::for_length(64, 16);
    ExplodingObjective objective;
    try {
        unconstrained_ascent(objective, LatentVector(gaussian(64, 1)), layout, config(100));
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        // 1e3^k exceeds 1e12 first at k = 5, the fifth evaluation.
        EXPECT_EQ(e.partial().records.size(), 4u);
        EXPECT_EQ(e.partial().final_latent.size(), 64u);
    }
}

TEST(Divergence, NonFiniteGradientStopsWithPartialTrajectory)
{
    const BlockLayout layout = BlockLayout::for_length(64, 16);
    ExplodingObjective objective;
    objective.nan_at = 2;
    try {
        projected_ascent(objective, feasible_start(64, 16, 1), layout, config(100));
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.partial().records.size(), 2u);
    }
    EXPECT_THROW(
        {
            ExplodingObjective o;
            o.nan_at = 0;
            projected_ascent(o, feasible_start(64, 16, 1), layout, config(5));
        },
        NumericalError);
}

TEST(Optimize, DispatchesOnMode)
{
    const BlockLayout layout = BlockLayout::for_length(128, 16);
    SpikeReward reward{1};
    const LatentVector x0 = feasible_start(128, 16, 8);
    OptimizerConfig cfg = config(10);
    cfg.mode = OptimizerMode::projected;
    EXPECT_EQ(optimize(reward, x0, layout, cfg).final_latent, projected_ascent(reward, x0, layout, cfg).final_latent);
    cfg.mode = OptimizerMode::regularized;
    EXPECT_THROW(optimize(reward, x0, layout, cfg), ValidationError);
    const RegularizerSpec spec{RegularizerKind::norm_chi, 1.0, Weighting::fixed};
    EXPECT_EQ(optimize(reward, x0, layout, cfg, spec).final_latent,
              regularized_ascent(reward, spec, x0, layout, cfg).final_latent);
    EXPECT_THROW(projected_ascent(reward, LatentVector::zeros(64), layout, cfg), DimensionError);
}
