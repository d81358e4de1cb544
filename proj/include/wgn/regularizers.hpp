#pragma once

// Soft regularizers used as baselines against the hard constraint.
//
// norm_chi:       -log p_chi_N(||x||), the chi-distribution likelihood of the
//                 Euclidean norm. Stationary at ||x||^2 = N - 1.
// power_spectral: (1/N) sum_{p < 2P} | ||xhat^(p)||_1 - mu B |, blockwise l1
//                 deviations over the FULL length-N unitary DFT (2P blocks of
//                 B), not the compact spectrum. mu = 0.875.

#include "wgn/block_projection.hpp"
#include "wgn/error.hpp"
#include "wgn/spectral_map.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace wgn {

struct LossEvaluation {
    double value = 0.0;
    std::vector<double> gradient;
};

enum class RegularizerKind { norm_chi, power_spectral };
enum class Weighting { fixed, gradient_normalized };

struct RegularizerSpec {
    RegularizerKind kind = RegularizerKind::norm_chi;
    double coefficient = 2.0;
    Weighting weighting = Weighting::fixed;
};

inline constexpr double kPowerSpectralMu = 0.875;

inline LossEvaluation l_norm_loss(const LatentVector& x)
{
    const double n = static_cast<double>(x.size());
    double r2 = 0.0;
    for (double v : x.values()) r2 += v * v;
    if (!(r2 > 0.0)) throw SingularInputError("norm loss is undefined at the zero vector");

    const double log_r = 0.5 * std::log(r2);
    const double log_norm_const = (0.5 * n - 1.0) * std::numbers::ln2 + std::lgamma(0.5 * n);
    LossEvaluation out;
    out.value = -((n - 1.0) * log_r - 0.5 * r2 - log_norm_const);

    const double factor = 1.0 - (n - 1.0) / r2;
    out.gradient.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out.gradient[i] = x[i] * factor;
    return out;
}

/// Subgradient uses sign(0) = 0 at block kinks and a zero direction for
/// coefficients with xhat_k = 0.
inline LossEvaluation l_power_loss(const LatentVector& x, const BlockLayout& layout)
{
    const std::size_t n = x.size();
    if (n != layout.n())
        throw DimensionError("latent length " + std::to_string(n) + " does not match layout N = " +
                             std::to_string(layout.n()));
    const std::size_t b = layout.block_size();
    const double target = kPowerSpectralMu * static_cast<double>(b);
    const double inv_n = 1.0 / static_cast<double>(n);

    const HermitianSpectrum xhat = dft_unitary(x);
    std::vector<Complex> weighted(n);
    LossEvaluation out;
    for (std::size_t p = 0; p < n / b; ++p) {
        double l1 = 0.0;
        for (std::size_t k = p * b; k < (p + 1) * b; ++k) l1 += std::abs(xhat[k]);
        const double dev = l1 - target;
        out.value += std::abs(dev) * inv_n;

        const double sign = dev > 0.0 ? 1.0 : (dev < 0.0 ? -1.0 : 0.0);
        for (std::size_t k = p * b; k < (p + 1) * b; ++k) {
            const double mag = std::abs(xhat[k]);
            if (mag > 0.0) weighted[k] = (sign * inv_n / mag) * xhat[k];
        }
    }

    // d|xhat_k|/dx = Re(conj(u_k) F_k.), so the gradient is Re(F^H (c * u)).
    const std::vector<Complex> back = idft_unitary(weighted);
    out.gradient.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.gradient[i] = back[i].real();
    return out;
}

inline LossEvaluation regularizer_loss(const RegularizerSpec& spec, const LatentVector& x, const BlockLayout& layout)
{
    switch (spec.kind) {
    case RegularizerKind::norm_chi: return l_norm_loss(x);
    case RegularizerKind::power_spectral: return l_power_loss(x, layout);
    }
    throw ValidationError("unknown regularizer kind");
}

/// Ascent direction for r - lambda * L_reg. With gradient_normalized
/// weighting, grad L_reg is first rescaled to the reward gradient's norm
/// (skipped when ||grad L_reg|| < 1e-12).
inline std::vector<double> combined_gradient(std::span<const double> reward_gradient, const LatentVector& x,
                                             const RegularizerSpec& spec, const BlockLayout& layout)
{
    if (reward_gradient.size() != x.size()) throw DimensionError("reward gradient and latent lengths differ");
    if (!std::isfinite(spec.coefficient) || spec.coefficient < 0.0)
        throw ValidationError("regularizer coefficient must be finite and >= 0");

    std::vector<double> g(reward_gradient.begin(), reward_gradient.end());
    if (spec.coefficient == 0.0) return g;

    const LossEvaluation reg = regularizer_loss(spec, x, layout);
    double weight = spec.coefficient;
    if (spec.weighting == Weighting::gradient_normalized) {
        double reg_sq = 0.0;
        double reward_sq = 0.0;
        for (double v : reg.gradient) reg_sq += v * v;
        for (double v : reward_gradient) reward_sq += v * v;
        if (std::sqrt(reg_sq) >= 1e-12) weight *= std::sqrt(reward_sq) / std::sqrt(reg_sq);
    }
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= weight * reg.gradient[i];
    return g;
}

} // namespace wgn
