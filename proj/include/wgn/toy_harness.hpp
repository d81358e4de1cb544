#pragma once

// Desk-scale stand-ins for the image experiments: a spectral-spike reward
// whose feasible maximum is known in closed form, circular autocorrelation
// diagnostics, and a driver that runs several optimization modes from one
// starting point.

#include "wgn/block_projection.hpp"
#include "wgn/error.hpp"
#include "wgn/feasible_set.hpp"
#include "wgn/optimizer.hpp"
#include "wgn/random.hpp"
#include "wgn/regularizers.hpp"
#include "wgn/spectral_map.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wgn {

/// r[l] = (1/N) sum_n x_n x_{(n - l) mod N}, computed through the periodogram.
class AutocorrelationProfile {
public:
    explicit AutocorrelationProfile(std::vector<double> values) : values_(std::move(values)) {}
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t lag) const noexcept { return values_[lag]; }
    std::span<const double> values() const noexcept { return values_; }

    /// mean over l != 0 of |r[l]|.
    double mean_off_origin() const
    {
        double s = 0.0;
        for (std::size_t l = 1; l < values_.size(); ++l) s += std::abs(values_[l]);
        return values_.size() > 1 ? s / static_cast<double>(values_.size() - 1) : 0.0;
    }

private:
    std::vector<double> values_;
};

inline AutocorrelationProfile autocorrelation(const LatentVector& x)
{
    const std::size_t n = x.size();
    const HermitianSpectrum xhat = dft_unitary(x);
    std::vector<Complex> periodogram(n);
    for (std::size_t k = 0; k < n; ++k) periodogram[k] = std::norm(xhat[k]);
    const std::vector<Complex> back = idft_unitary(periodogram);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<double> r(n);
    for (std::size_t l = 0; l < n; ++l) r[l] = back[l].real() * scale;
    return AutocorrelationProfile(std::move(r));
}

/// Circular autocorrelation at one lag by direct summation, O(N).
inline double autocorrelation_at(std::span<const double> x, std::size_t lag)
{
    const std::size_t n = x.size();
    lag %= n;
    double s = 0.0;
    for (std::size_t i = lag; i < n; ++i) s += x[i] * x[i - lag];
    for (std::size_t i = 0; i < lag; ++i) s += x[i] * x[i + n - lag];
    return s / static_cast<double>(n);
}

/// Direct O(N^2) circular autocorrelation.
inline AutocorrelationProfile autocorrelation_direct(const LatentVector& x)
{
    std::vector<double> r(x.size());
    for (std::size_t l = 0; l < x.size(); ++l) r[l] = autocorrelation_at(x.values(), l);
    return AutocorrelationProfile(std::move(r));
}

inline constexpr std::size_t kWienerKhinchinAllLagsLimit = 65536;

/// Max |direct circular sum - inverse DFT of the periodogram| over lags.
/// Every lag is checked up to N = 65536; beyond that an evenly strided
/// subset of about 65536 lags (always including lag 0).
inline double wiener_khinchin_check(const LatentVector& x)
{
    const std::size_t n = x.size();
    const AutocorrelationProfile spectral = autocorrelation(x);
    const std::size_t stride = (n + kWienerKhinchinAllLagsLimit - 1) / kWienerKhinchinAllLagsLimit;
    double worst = 0.0;
    for (std::size_t l = 0; l < n; l += stride)
        worst = std::max(worst, std::abs(autocorrelation_at(x.values(), l) - spectral[l]));
    return worst;
}

/// |y_bin|^2 on y = to_compact(x). The map is R-linear with adjoint
/// from_compact / 2, so the gradient is from_compact(y_bin e_bin).
inline Evaluation spike_reward(const LatentVector& x, std::size_t target_bin)
{
    const std::size_t half = x.size() / 2;
    if (target_bin >= half)
        throw ValidationError("target bin " + std::to_string(target_bin) + " out of range [0, " +
                              std::to_string(half) + ")");
    const CompactSpectrum y = to_compact(x);
    std::vector<Complex> z(half);
    z[target_bin] = y[target_bin];
    Evaluation out;
    out.value = std::norm(y[target_bin]);
    out.gradient = std::move(from_compact(CompactSpectrum(std::move(z)))).release();
    return out;
}

struct SpikeReward {
    std::size_t target_bin = 0;
    Evaluation evaluate(const LatentVector& x) const { return spike_reward(x, target_bin); }
};

enum class ComparisonMode { unconstrained, norm_chi, power_spectral, projected };

inline std::string_view to_string(ComparisonMode m)
{
    switch (m) {
    case ComparisonMode::unconstrained: return "unconstrained";
    case ComparisonMode::norm_chi: return "norm_chi";
    case ComparisonMode::power_spectral: return "power_spectral";
    case ComparisonMode::projected: return "projected";
    }
    return "unknown";
}

inline ComparisonMode parse_comparison_mode(std::string_view s)
{
    for (auto m : {ComparisonMode::unconstrained, ComparisonMode::norm_chi, ComparisonMode::power_spectral,
                   ComparisonMode::projected})
        if (to_string(m) == s) return m;
    throw ValidationError("unknown mode '" + std::string(s) + "'");
}

struct ScenarioConfig {
    std::size_t n = 1024;
    std::size_t block_size = BlockLayout::default_block_size;
    std::size_t target_bin = 0;
    std::vector<ComparisonMode> modes{ComparisonMode::unconstrained, ComparisonMode::norm_chi,
                                      ComparisonMode::power_spectral, ComparisonMode::projected};
    std::size_t iterations = 500;
    double step_size = 0.02;
    double clip = 0.03;
    double lambda = 2.0;
    Weighting weighting = Weighting::fixed;
    std::uint64_t seed = 0;
    bool project_gradient = true;
};

struct ModeOutcome {
    ComparisonMode mode = ComparisonMode::projected;
    double final_value = 0.0;
    double max_compact_magnitude = 0.0;
    double max_residual = 0.0;
    double cos_to_init = 0.0;
    double wall_seconds = 0.0;
    Trajectory trajectory;
};

struct ComparisonTable {
    LatentVector initial;
    std::vector<ModeOutcome> outcomes;
};

/// Shared starting point: a standard-Gaussian draw projected onto the
/// feasible set, so every mode starts from the same feasible latent.
inline LatentVector scenario_initial_latent(const ScenarioConfig& sc, const BlockLayout& layout)
{
    Engine engine(derive_seed(sc.seed, 0));
    std::vector<double> v(sc.n);
    fill_standard_normal(v, engine);
    return project_to_feasible(LatentVector(std::move(v)), layout, derive_seed(sc.seed, 1)).output;
}

inline OptimizerConfig scenario_optimizer_config(const ScenarioConfig& sc)
{
    OptimizerConfig cfg;
    cfg.step_size = sc.step_size;
    cfg.iterations = sc.iterations;
    cfg.clip_threshold = sc.clip;
    cfg.seed = sc.seed;
    cfg.project_gradient = sc.project_gradient;
    cfg.validate();
    return cfg;
}

inline BlockLayout scenario_layout(const ScenarioConfig& sc)
{
    const BlockLayout layout = BlockLayout::for_length(sc.n, sc.block_size);
    if (sc.target_bin >= sc.n / 2)
        throw ValidationError("target bin " + std::to_string(sc.target_bin) + " out of range [0, " +
                              std::to_string(sc.n / 2) + ")");
    if (sc.modes.empty()) throw ValidationError("scenario names no modes");
    return layout;
}

/// Runs one mode from `initial`. DivergenceError propagates with the
/// partial trajectory.
inline ModeOutcome run_comparison_mode(const ScenarioConfig& sc, const BlockLayout& layout,
                                       const LatentVector& initial, ComparisonMode mode)
{
    const OptimizerConfig cfg = scenario_optimizer_config(sc);
    SpikeReward reward{sc.target_bin};

    const auto start = std::chrono::steady_clock::now();
    Trajectory traj = [&] {
        switch (mode) {
        case ComparisonMode::projected: return projected_ascent(reward, initial, layout, cfg);
        case ComparisonMode::unconstrained: return unconstrained_ascent(reward, initial, layout, cfg);
        case ComparisonMode::norm_chi:
            return regularized_ascent(reward, {RegularizerKind::norm_chi, sc.lambda, sc.weighting}, initial,
                                      layout, cfg);
        case ComparisonMode::power_spectral:
            return regularized_ascent(reward, {RegularizerKind::power_spectral, sc.lambda, sc.weighting}, initial,
                                      layout, cfg);
        }
        throw ValidationError("unknown mode");
    }();
    const auto stop = std::chrono::steady_clock::now();

    const IterationRecord& last = traj.records.back();
    double max_magnitude = 0.0;
    const CompactSpectrum final_spectrum = to_compact(traj.final_latent);
    for (const Complex& c : final_spectrum.coeffs()) max_magnitude = std::max(max_magnitude, std::abs(c));
    return ModeOutcome{mode,
                       last.value,
                       max_magnitude,
                       last.max_residual,
                       last.cos_to_init,
                       std::chrono::duration<double>(stop - start).count(),
                       std::move(traj)};
}

inline ComparisonTable run_comparison(const ScenarioConfig& sc)
{
    const BlockLayout layout = scenario_layout(sc);
    scenario_optimizer_config(sc);
    ComparisonTable table{scenario_initial_latent(sc, layout), {}};
    for (ComparisonMode mode : sc.modes) table.outcomes.push_back(run_comparison_mode(sc, layout, table.initial, mode));
    return table;
}

} // namespace wgn
