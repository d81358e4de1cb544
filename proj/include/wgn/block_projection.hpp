#pragma once

// Euclidean projection of one complex block onto the intersection of the
// l1 sphere of radius (sqrt(pi)/2) B and the l2 sphere of radius sqrt(B).
//
// The optimum keeps every phase and orders magnitudes like the input, so the
// problem collapses to magnitudes s_j = c * ReLU(|y_j| - lambda). Sorting the
// magnitudes descending (w) with prefix sums S1_k, S2_k, the threshold on the
// segment where the top k+1 entries are active is
//
//   lambda_k = S1_k/(k+1) - sqrt(gamma B)/(k+1) * sqrt(((k+1) S2_k - S1_k^2) / (k+1 - gamma B))
//
// with gamma = pi/4, and exactly one k with k+1 >= gamma B brackets its own
// root: w_{k+1} <= lambda_k < w_k (w_B = -inf).

#include "wgn/error.hpp"
#include "wgn/random.hpp"
#include "wgn/spectral_map.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace wgn {

/// Partition of a length-N latent into P blocks of B compact coefficients, N = 2PB.
class BlockLayout {
public:
    static constexpr double gamma = std::numbers::pi / 4.0;
    static constexpr std::size_t default_block_size = 16;

    BlockLayout(std::size_t block_size, std::size_t block_count) : block_size_(block_size), block_count_(block_count)
    {
        if (block_size_ < 2) throw ValidationError("block size must be >= 2, got " + std::to_string(block_size_));
        if (block_count_ < 1) throw ValidationError("block count must be >= 1");
    }

    /// Layout for a latent of length n; throws DimensionError unless 2B divides n.
    static BlockLayout for_length(std::size_t n, std::size_t block_size)
    {
        if (block_size < 2) throw ValidationError("block size must be >= 2, got " + std::to_string(block_size));
        if (n == 0 || n % (2 * block_size) != 0)
            throw DimensionError("latent length " + std::to_string(n) + " is not divisible by 2*B = " +
                                 std::to_string(2 * block_size));
        return BlockLayout(block_size, n / (2 * block_size));
    }

    std::size_t block_size() const noexcept { return block_size_; }
    std::size_t block_count() const noexcept { return block_count_; }
    std::size_t n() const noexcept { return 2 * block_size_ * block_count_; }

    double l1_target() const noexcept { return 0.5 * std::sqrt(std::numbers::pi) * static_cast<double>(block_size_); }
    double l2sq_target() const noexcept { return static_cast<double>(block_size_); }
    double gamma_b() const noexcept { return gamma * static_cast<double>(block_size_); }

    /// Smallest admissible active-set size, ceil(gamma B).
    std::size_t min_active() const noexcept { return static_cast<std::size_t>(std::ceil(gamma_b())); }

    friend bool operator==(const BlockLayout&, const BlockLayout&) = default;

private:
    std::size_t block_size_;
    std::size_t block_count_;
};

struct BlockProjectionResult {
    std::vector<Complex> projected;
    double threshold_lambda = 0.0;
    std::size_t active_count = 0;
    bool perturbed = false;
    double distance_sq = 0.0;
};

// Perturbation applied to exact zeros and exact maximal ties.
inline constexpr double kDegeneracyPerturbation = 1e-6;
inline constexpr int kDegeneracyRetries = 8;

namespace detail {

// Threshold for the k+1 largest magnitudes given their mean and centred sum
// of squares m2 (k s2 - s1^2 = k m2, without the cancellation).
inline double threshold_at(std::size_t k, double mean, double m2, double gamma_b) noexcept
{
    const double active = static_cast<double>(k + 1);
    return mean - std::sqrt(gamma_b * std::max(m2, 0.0) / (active * (active - gamma_b)));
}

struct ThresholdChoice {
    std::size_t k = 0;
    double lambda = 0.0;
};

struct BlockWorkspace {
    std::vector<Complex> work;
    std::vector<double> magnitude;
    std::vector<std::pair<double, std::uint32_t>> order;
    std::vector<double> sorted;
    std::vector<char> flags;

    void resize(std::size_t b)
    {
        work.resize(b);
        magnitude.resize(b);
        order.resize(b);
        sorted.resize(b);
    }
};

// Linear scan over k from ceil(gamma B) - 1. Rounding can leave the root a
// hair outside its bracket; the closest candidate is accepted if the miss is
// below 1e-12 * max(w). Empty when no candidate qualifies (an all-zero block).
inline std::optional<ThresholdChoice> find_threshold(std::span<const double> w, const BlockLayout& layout)
{
    const std::size_t b = w.size();
    const double gamma_b = layout.gamma_b();
    const double slack = 1e-12 * w[0];

    double mean = 0.0;
    double m2 = 0.0;
    std::optional<ThresholdChoice> best;
    double best_miss = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < b; ++k) {
        const double delta = w[k] - mean;
        mean += delta / static_cast<double>(k + 1);
        m2 += delta * (w[k] - mean);
        if (k + 1 < layout.min_active()) continue;

        const double lambda = threshold_at(k, mean, m2, gamma_b);
        const double upper = w[k];
        const double lower = k + 1 < b ? w[k + 1] : -std::numeric_limits<double>::infinity();
        if (lower <= lambda && lambda < upper) return ThresholdChoice{k, lambda};

        const double miss = lambda < lower ? lower - lambda : lambda - upper;
        if (miss < best_miss) {
            best_miss = miss;
            best = ThresholdChoice{k, lambda};
        }
    }
    if (best && best_miss < slack) return best;
    return std::nullopt;
}

// Marks the maximal tie group when it holds at least ceil(gamma B) entries.
inline bool flag_max_ties(std::span<const double> magnitude, std::size_t min_active, std::vector<char>& flags)
{
    flags.assign(magnitude.size(), 0);
    const double top = *std::max_element(magnitude.begin(), magnitude.end());
    const auto ties = static_cast<std::size_t>(std::count(magnitude.begin(), magnitude.end(), top));
    if (ties < min_active) return false;
    for (std::size_t j = 0; j < magnitude.size(); ++j) flags[j] = magnitude[j] == top;
    return true;
}

inline bool flag_zeros(std::span<const double> magnitude, std::vector<char>& flags)
{
    flags.assign(magnitude.size(), 0);
    bool any = false;
    for (std::size_t j = 0; j < magnitude.size(); ++j)
        if (magnitude[j] == 0.0) flags[j] = any = true;
    return any;
}

struct BlockSummary {
    double threshold_lambda = 0.0;
    std::size_t active_count = 0;
    bool perturbed = false;
    double distance_sq = 0.0;
};

// An exact zero only leaves the phase undefined when the threshold would
// activate it (lambda below zero) or when no threshold exists at all; a zero
// that stays inactive maps to 0 for every phase and is left alone, which keeps
// the projection idempotent on its own outputs.
template <std::uniform_random_bit_generator G>
BlockSummary project_block_into(std::span<const Complex> block, std::span<Complex> out, const BlockLayout& layout,
                                G& rng, BlockWorkspace& ws)
{
    const std::size_t b = layout.block_size();
    if (block.size() != b || out.size() != b)
        throw DimensionError("block length " + std::to_string(block.size()) + " does not match B = " +
                             std::to_string(b));
    if (!all_finite(block)) throw ValidationError("block contains non-finite entries");

    ws.resize(b);
    std::copy(block.begin(), block.end(), ws.work.begin());

    BlockSummary summary;
    ThresholdChoice choice;
    for (int attempt = 0;; ++attempt) {
        for (std::size_t j = 0; j < b; ++j) ws.magnitude[j] = std::sqrt(std::norm(ws.work[j]));

        if (!flag_max_ties(ws.magnitude, layout.min_active(), ws.flags)) {
            // Total order on (magnitude desc, index asc) keeps the result reproducible.
            for (std::size_t j = 0; j < b; ++j) ws.order[j] = {ws.magnitude[j], static_cast<std::uint32_t>(j)};
            std::sort(ws.order.begin(), ws.order.end(), [](const auto& a, const auto& c) {
                return a.first != c.first ? a.first > c.first : a.second < c.second;
            });
            for (std::size_t r = 0; r < b; ++r) ws.sorted[r] = ws.order[r].first;

            const std::optional<ThresholdChoice> found = find_threshold(ws.sorted, layout);
            const bool has_zero = ws.sorted[b - 1] == 0.0;
            const double activation = -1e-12 * ws.sorted[0];
            if (found && !(has_zero && found->lambda < activation)) {
                choice = *found;
                break;
            }
            if (!has_zero) throw NumericalError("no bracketing threshold found");
            flag_zeros(ws.magnitude, ws.flags);
        }
        if (attempt == kDegeneracyRetries)
            throw DegenerateInputError("block still degenerate after " + std::to_string(kDegeneracyRetries) +
                                       " perturbations");
        for (std::size_t j = 0; j < b; ++j)
            if (ws.flags[j]) ws.work[j] += kDegeneracyPerturbation * standard_complex_normal(rng);
        summary.perturbed = true;
    }

    // Output in centred form a_j = alpha + beta (m_j - mean) over the active
    // set, which equals c (m_j - lambda) but stays accurate when the active
    // magnitudes nearly coincide (as right after a tie perturbation).
    const std::size_t active = choice.k + 1;
    double mean = 0.0;
    for (std::size_t r = 0; r < active; ++r) mean += ws.sorted[r];
    mean /= static_cast<double>(active);
    double centred = 0.0;
    for (std::size_t r = 0; r < active; ++r) centred += (ws.sorted[r] - mean) * (ws.sorted[r] - mean);
    const double l1 = layout.l1_target();
    const double alpha = l1 / static_cast<double>(active);
    const double beta = std::sqrt(std::max(layout.l2sq_target() - l1 * alpha, 0.0) / centred);

    double distance_sq = 0.0;
    std::fill(out.begin(), out.end(), Complex(0.0, 0.0));
    for (std::size_t r = 0; r < active; ++r) {
        const std::size_t j = ws.order[r].second;
        const double m = ws.magnitude[j];
        const double a = std::max(alpha + beta * (m - mean), 0.0);
        if (m > 0.0) out[j] = (a / m) * ws.work[j];
    }
    for (std::size_t j = 0; j < b; ++j) distance_sq += std::norm(out[j] - block[j]);
    const double lambda = mean - alpha / beta;

    summary.threshold_lambda = lambda;
    summary.active_count = choice.k + 1;
    summary.distance_sq = distance_sq;
    return summary;
}

} // namespace detail

/// Closed-form projection of one block. Exact maximal ties (at least
/// ceil(gamma B) of them) and exact zeros the threshold would activate are
/// broken by a 1e-6 complex-Gaussian perturbation drawn from rng (at most
/// kDegeneracyRetries rounds, then DegenerateInputError).
template <std::uniform_random_bit_generator G>
BlockProjectionResult project_block(std::span<const Complex> block, const BlockLayout& layout, G& rng)
{
    detail::BlockWorkspace ws;
    BlockProjectionResult result;
    result.projected.resize(block.size());
    const detail::BlockSummary s = detail::project_block_into(block, std::span<Complex>(result.projected), layout, rng, ws);
    result.threshold_lambda = s.threshold_lambda;
    result.active_count = s.active_count;
    result.perturbed = s.perturbed;
    result.distance_sq = s.distance_sq;
    return result;
}

struct MagnitudeBounds {
    double min = 0.0;
    double max = 0.0;
};

/// Attainable range of any single |y_j| on the feasible set: the extremes
/// occur when the other B-1 magnitudes are equal. The analytic lower root is
/// negative for B >= 4 and is floored at 0.
inline MagnitudeBounds magnitude_bounds(const BlockLayout& layout)
{
    const double g = BlockLayout::gamma;
    const double spread = std::sqrt((1.0 - g) * static_cast<double>(layout.block_size() - 1));
    return {std::max(0.0, std::sqrt(g) - spread), std::sqrt(g) + spread};
}

inline MagnitudeBounds magnitude_bounds(std::size_t block_size)
{
    return magnitude_bounds(BlockLayout(block_size, 1));
}

// Squared l1 over squared l2 of the shrunk magnitudes, p1(lambda)^2 / p2(lambda).
inline double shrinkage_ratio(std::span<const double> magnitude, double lambda) noexcept
{
    double p1 = 0.0;
    double p2 = 0.0;
    for (double m : magnitude) {
        const double r = std::max(m - lambda, 0.0);
        p1 += r;
        p2 += r * r;
    }
    return p1 * p1 / p2;
}

/// Test oracle: finds the threshold by scanning p1^2/p2 = gamma B on a dense
/// grid and refining by bisection, without sorting or the closed form. The
/// grid starts at a negative lambda far enough left that the ratio exceeds
/// gamma B, since inputs more concentrated than the feasible set need
/// lambda < 0.
inline std::vector<Complex> oracle_project_block(std::span<const Complex> block, const BlockLayout& layout,
                                                 std::size_t grid_resolution)
{
    const std::size_t b = layout.block_size();
    if (b > 16) throw ValidationError("oracle projection supports B <= 16");
    if (grid_resolution < 1000) throw ValidationError("oracle grid resolution must be >= 1000");
    if (block.size() != b) throw DimensionError("block length does not match layout");
    if (!detail::all_finite(block)) throw ValidationError("block contains non-finite entries");

    std::vector<double> magnitude(b);
    for (std::size_t j = 0; j < b; ++j) magnitude[j] = std::abs(block[j]);
    const double top = *std::max_element(magnitude.begin(), magnitude.end());
    if (top <= 0.0) throw OracleFailure("oracle: all-zero block");

    const double target = layout.gamma_b();
    auto excess = [&](double lambda) { return shrinkage_ratio(magnitude, lambda) - target; };
    const double ties = static_cast<double>(std::count(magnitude.begin(), magnitude.end(), top));
    const double excess_at_top = ties - target; // limit as lambda -> top from below

    double left = -std::max(top, 1.0);
    for (int i = 0; i < 80 && excess(left) <= 0.0; ++i) left *= 2.0;
    if (excess(left) <= 0.0) throw OracleFailure("oracle: ratio never exceeds gamma*B");

    std::optional<std::pair<double, double>> bracket;
    const double step = (top - left) / static_cast<double>(grid_resolution);
    double prev = left;
    for (std::size_t i = 1; i <= grid_resolution && !bracket; ++i) {
        const bool last = i == grid_resolution;
        const double lambda = last ? top : left + step * static_cast<double>(i);
        const double value = last ? excess_at_top : excess(lambda);
        if (excess(prev) > 0.0 && value <= 0.0) bracket.emplace(prev, lambda);
        prev = lambda;
    }
    if (!bracket) throw OracleFailure("oracle: no sign change on the lambda grid");

    auto [lo, hi] = *bracket;
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    const double lambda = 0.5 * (lo + hi);

    double p1 = 0.0;
    for (double m : magnitude) p1 += std::max(m - lambda, 0.0);
    std::vector<Complex> out(b);
    for (std::size_t j = 0; j < b; ++j) {
        const double s = layout.l1_target() * std::max(magnitude[j] - lambda, 0.0) / p1;
        out[j] = magnitude[j] > 0.0 ? s * (block[j] / magnitude[j]) : Complex(s, 0.0);
    }
    return out;
}

} // namespace wgn
