#pragma once

// Projection onto the white-Gaussian-noise feasible set in the spatial
// domain: map to the compact spectrum, project every block, map back. Because
// ||from_compact(z)||^2 = 2 ||z||^2, the blockwise projection in the compact
// domain is exactly the spatial Euclidean projection.

#include "wgn/block_projection.hpp"
#include "wgn/error.hpp"
#include "wgn/random.hpp"
#include "wgn/spectral_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace wgn {

struct ProjectionReport {
    LatentVector output;
    std::optional<double> cosine_similarity; // empty when the input is the zero vector
    double distance = 0.0;
    double max_block_l1_residual = 0.0;
    double max_block_l2_residual = 0.0;
    std::size_t blocks_perturbed = 0;
    std::vector<std::size_t> threshold_indices; // k* per block
};

struct BlockResiduals {
    std::vector<double> l1;
    std::vector<double> l2;

    double max_l1() const { return l1.empty() ? 0.0 : *std::max_element(l1.begin(), l1.end()); }
    double max_l2() const { return l2.empty() ? 0.0 : *std::max_element(l2.begin(), l2.end()); }
    double max() const { return std::max(max_l1(), max_l2()); }
};

namespace detail {

inline void require_layout(std::size_t n, const BlockLayout& layout)
{
    if (n != layout.n())
        throw DimensionError("latent length " + std::to_string(n) + " does not match layout N = 2*P*B = " +
                             std::to_string(layout.n()));
}

inline BlockResiduals compact_residuals(std::span<const Complex> y, const BlockLayout& layout)
{
    const std::size_t b = layout.block_size();
    BlockResiduals r;
    r.l1.resize(layout.block_count());
    r.l2.resize(layout.block_count());
    for (std::size_t p = 0; p < layout.block_count(); ++p) {
        double l1 = 0.0;
        double l2 = 0.0;
        for (std::size_t j = p * b; j < (p + 1) * b; ++j) {
            const double sq = std::norm(y[j]);
            l1 += std::sqrt(sq);
            l2 += sq;
        }
        r.l1[p] = std::abs(l1 - layout.l1_target());
        r.l2[p] = std::abs(l2 - layout.l2sq_target());
    }
    return r;
}

inline double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace detail

/// Per-block |l1 - (sqrt(pi)/2) B| and |l2^2 - B| of to_compact(x).
inline BlockResiduals feasibility_residuals(const LatentVector& x, const BlockLayout& layout)
{
    detail::require_layout(x.size(), layout);
    const CompactSpectrum y = to_compact(x);
    return detail::compact_residuals(y.coeffs(), layout);
}

/// Euclidean projection of x onto the feasible set. Block p draws any
/// perturbation noise from derive_seed(seed, p), so the result does not
/// depend on the order blocks are processed in.
inline ProjectionReport project_to_feasible(const LatentVector& x, const BlockLayout& layout, std::uint64_t seed)
{
    detail::require_layout(x.size(), layout);
    const std::size_t b = layout.block_size();
    const CompactSpectrum y = to_compact(x);

    std::vector<Complex> projected(y.size());
    ProjectionReport report{LatentVector::zeros(x.size()), std::nullopt, 0.0, 0.0, 0.0, 0, {}};
    report.threshold_indices.resize(layout.block_count());

    detail::BlockWorkspace ws;
    for (std::size_t p = 0; p < layout.block_count(); ++p) {
        LazyEngine rng(derive_seed(seed, p));
        const auto s = detail::project_block_into(y.coeffs().subspan(p * b, b),
                                                  std::span<Complex>(projected).subspan(p * b, b), layout, rng, ws);
        report.threshold_indices[p] = s.active_count - 1;
        if (s.perturbed) ++report.blocks_perturbed;
    }

    const BlockResiduals residuals = detail::compact_residuals(projected, layout);
    report.max_block_l1_residual = residuals.max_l1();
    report.max_block_l2_residual = residuals.max_l2();

    report.output = from_compact(CompactSpectrum(std::move(projected)));
    const auto in = x.values();
    const auto out = report.output.values();
    double diff_sq = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) diff_sq += (in[i] - out[i]) * (in[i] - out[i]);
    report.distance = std::sqrt(diff_sq);

    const double in_norm = std::sqrt(detail::dot(in, in));
    const double out_norm = std::sqrt(detail::dot(out, out));
    if (in_norm > 0.0 && out_norm > 0.0) report.cosine_similarity = detail::dot(in, out) / (in_norm * out_norm);
    return report;
}

struct SimilarityStudyResult {
    std::size_t sample_count = 0;
    std::size_t undefined_count = 0;     // samples whose cosine is undefined (zero input)
    std::optional<double> min_cos;       // over defined samples; empty if none
    std::optional<double> mean_cos;
    std::optional<double> p01_cos;       // nearest-rank 1st percentile
    std::uint64_t seed = 0;
    std::vector<std::optional<double>> cosines; // per sample, in sample order
};

// Streams used by the study: sample s draws its latent from
// derive_seed(seed, 2s) and its projection noise from derive_seed(seed, 2s+1).
inline std::uint64_t study_sample_seed(std::uint64_t seed, std::size_t s) { return derive_seed(seed, 2 * s); }
inline std::uint64_t study_projection_seed(std::uint64_t seed, std::size_t s) { return derive_seed(seed, 2 * s + 1); }

inline SimilarityStudyResult summarize_similarity(std::vector<std::optional<double>> cosines, std::uint64_t seed)
{
    SimilarityStudyResult result;
    result.sample_count = cosines.size();
    result.seed = seed;

    std::vector<double> defined;
    defined.reserve(cosines.size());
    for (const auto& c : cosines) {
        if (c) defined.push_back(*c);
        else ++result.undefined_count;
    }
    if (!defined.empty()) {
        std::sort(defined.begin(), defined.end());
        double sum = 0.0;
        for (double c : defined) sum += c;
        const auto rank = static_cast<std::size_t>(std::ceil(0.01 * static_cast<double>(defined.size())));
        result.min_cos = defined.front();
        result.mean_cos = sum / static_cast<double>(defined.size());
        result.p01_cos = defined[std::max<std::size_t>(rank, 1) - 1];
    }
    result.cosines = std::move(cosines);
    return result;
}

/// Runs the cosine-similarity study over caller-generated samples.
/// make_sample(s, engine) returns sample s; samples are sharded across
/// `threads` workers with deterministic per-sample seeds.
template <class SampleFn>
SimilarityStudyResult run_similarity_study(std::size_t sample_count, const BlockLayout& layout, std::uint64_t seed,
                                           SampleFn make_sample, unsigned threads = 0)
{
    if (sample_count < 1) throw ValidationError("sample count must be >= 1");
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, sample_count));

    std::vector<std::optional<double>> cosines(sample_count);
    auto worker = [&](unsigned shard) {
        for (std::size_t s = shard; s < sample_count; s += threads) {
            Engine engine(study_sample_seed(seed, s));
            const LatentVector x = make_sample(s, engine);
            cosines[s] = project_to_feasible(x, layout, study_projection_seed(seed, s)).cosine_similarity;
        }
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::exception_ptr> errors(threads);
        {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t)
                pool.emplace_back([&, t] {
                    try {
                        worker(t);
                    } catch (...) {
                        errors[t] = std::current_exception();
                    }
                });
        }
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return summarize_similarity(std::move(cosines), seed);
}

/// Draws sample_count standard-Gaussian latents of length n and records the
/// cosine similarity between each and its projection.
inline SimilarityStudyResult cosine_similarity_study(std::size_t sample_count, std::size_t n,
                                                     const BlockLayout& layout, std::uint64_t seed,
                                                     unsigned threads = 0)
{
    detail::require_layout(n, layout);
    return run_similarity_study(
        sample_count, layout, seed,
        [n](std::size_t, Engine& engine) {
            std::vector<double> v(n);
            fill_standard_normal(v, engine);
            return LatentVector(std::move(v));
        },
        threads);
}

} // namespace wgn
