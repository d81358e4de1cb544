#pragma once

// Unitary DFT and the bijection between a real latent x in R^N and its
// redundancy-free compact spectrum y in C^{N/2}:
//
//   y_0 = xhat_0 / sqrt(2) + i * xhat_{N/2} / sqrt(2),   y_k = xhat_k  (1 <= k < N/2)
//
// where xhat = F x with F the unitary DFT (1/sqrt(N) both directions, forward
// kernel e^{-2 pi i jk/N}). The map is R-linear and ||from_compact(z)||^2 =
// 2 ||z||^2. Latents are 1-D in caller-provided order; no 2-D layout is
// assumed.

#include "wgn/detail/fftw.hpp"
#include "wgn/error.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wgn {

using Complex = std::complex<double>;

namespace detail {

inline bool all_finite(std::span<const double> v) noexcept
{
    for (double d : v)
        if (!std::isfinite(d)) return false;
    return true;
}

inline bool all_finite(std::span<const Complex> v) noexcept
{
    for (const Complex& c : v)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

} // namespace detail

/// Real spatial-domain latent of even length N >= 2 with finite entries.
class LatentVector {
public:
    explicit LatentVector(std::vector<double> values) : values_(std::move(values))
    {
        if (values_.size() < 2 || values_.size() % 2 != 0)
            throw DimensionError("latent length must be even and >= 2, got " + std::to_string(values_.size()));
        if (!detail::all_finite(values_)) throw ValidationError("latent contains non-finite entries");
    }

    static LatentVector zeros(std::size_t n) { return LatentVector(std::vector<double>(n, 0.0)); }

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    const std::vector<double>& vector() const noexcept { return values_; }
    std::vector<double> release() && noexcept { return std::move(values_); }

    friend bool operator==(const LatentVector&, const LatentVector&) = default;

private:
    std::vector<double> values_;
};

/// Full length-N unitary DFT of a real vector. Symmetry is not enforced on
/// construction; check_hermitian audits it.
class HermitianSpectrum {
public:
    explicit HermitianSpectrum(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs))
    {
        if (coeffs_.size() < 2 || coeffs_.size() % 2 != 0)
            throw DimensionError("spectrum length must be even and >= 2, got " + std::to_string(coeffs_.size()));
    }

    std::size_t size() const noexcept { return coeffs_.size(); }
    const Complex& operator[](std::size_t k) const noexcept { return coeffs_[k]; }
    std::span<const Complex> coeffs() const noexcept { return coeffs_; }

private:
    std::vector<Complex> coeffs_;
};

/// Compact spectrum y in C^{N/2}; pairs with a latent of length 2 * size().
class CompactSpectrum {
public:
    explicit CompactSpectrum(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs))
    {
        if (coeffs_.empty()) throw DimensionError("compact spectrum must be non-empty");
        if (!detail::all_finite(coeffs_)) throw ValidationError("compact spectrum contains non-finite entries");
    }

    static CompactSpectrum zeros(std::size_t half_n) { return CompactSpectrum(std::vector<Complex>(half_n)); }

    std::size_t size() const noexcept { return coeffs_.size(); }
    std::size_t latent_size() const noexcept { return 2 * coeffs_.size(); }
    const Complex& operator[](std::size_t k) const noexcept { return coeffs_[k]; }
    std::span<const Complex> coeffs() const noexcept { return coeffs_; }
    std::vector<Complex> release() && noexcept { return std::move(coeffs_); }

private:
    std::vector<Complex> coeffs_;
};

inline HermitianSpectrum dft_unitary(const LatentVector& x)
{
    const std::size_t n = x.size();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<Complex> out(n);
    detail::complex_dft_with(
        n, -1, [&](std::span<Complex> a) { std::copy(x.values().begin(), x.values().end(), a.begin()); },
        [&](std::span<const Complex> b) {
            for (std::size_t k = 0; k < n; ++k) out[k] = b[k] * scale;
        });
    return HermitianSpectrum(std::move(out));
}

/// Inverse unitary DFT of an arbitrary complex sequence (kernel e^{+2 pi i jk/N}).
inline std::vector<Complex> idft_unitary(std::span<const Complex> spectrum)
{
    const std::size_t n = spectrum.size();
    if (n == 0) throw DimensionError("inverse DFT of an empty sequence");
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<Complex> out(n);
    detail::complex_dft_with(
        n, +1, [&](std::span<Complex> a) { std::copy(spectrum.begin(), spectrum.end(), a.begin()); },
        [&](std::span<const Complex> b) {
            for (std::size_t j = 0; j < n; ++j) out[j] = b[j] * scale;
        });
    return out;
}

inline CompactSpectrum to_compact(const LatentVector& x)
{
    const std::size_t n = x.size();
    const std::size_t half = n / 2;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double packed = scale / std::numbers::sqrt2;

    std::vector<Complex> y(half);
    detail::real_dft_with(x.values(), [&](std::span<const Complex> bins) {
        y[0] = Complex(bins[0].real() * packed, bins[half].real() * packed);
        for (std::size_t k = 1; k < half; ++k) y[k] = bins[k] * scale;
    });
    return CompactSpectrum(std::move(y));
}

/// Rebuilds the Hermitian spectrum from y and inverts it. Throws
/// NumericalError if the inverse leaves an imaginary residue of at least
/// 1e-10 * (1 + ||y||), which only a broken FFT backend produces.
inline LatentVector from_compact(const CompactSpectrum& y)
{
    const std::size_t half = y.size();
    const std::size_t n = 2 * half;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));

    double norm_sq = 0.0;
    for (const Complex& c : y.coeffs()) norm_sq += std::norm(c);
    const double limit = 1e-10 * (1.0 + std::sqrt(norm_sq));

    std::vector<double> x(n);
    double residue = 0.0;
    detail::complex_dft_with(
        n, +1,
        [&](std::span<Complex> full) {
            full[0] = Complex(std::numbers::sqrt2 * y[0].real(), 0.0);
            full[half] = Complex(std::numbers::sqrt2 * y[0].imag(), 0.0);
            for (std::size_t k = 1; k < half; ++k) {
                full[k] = y[k];
                full[n - k] = std::conj(y[k]);
            }
        },
        [&](std::span<const Complex> spatial) {
            for (std::size_t j = 0; j < n; ++j) {
                x[j] = spatial[j].real() * scale;
                residue = std::max(residue, std::abs(spatial[j].imag()));
            }
        });
    residue *= scale;
    if (residue >= limit)
        throw NumericalError("inverse compact map left imaginary residue " + std::to_string(residue));
    return LatentVector(std::move(x));
}

struct HermitianReport {
    double max_pair_deviation = 0.0; // max_k |s_k - conj(s_{N-k})|, 1 <= k < N/2
    double dc_imag = 0.0;            // |Im s_0|
    double nyquist_imag = 0.0;       // |Im s_{N/2}|
    bool passed = false;
};

inline HermitianReport check_hermitian(const HermitianSpectrum& s, double tol)
{
    if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
    const std::size_t n = s.size();
    HermitianReport report;
    report.dc_imag = std::abs(s[0].imag());
    report.nyquist_imag = std::abs(s[n / 2].imag());
    for (std::size_t k = 1; k < n / 2; ++k)
        report.max_pair_deviation = std::max(report.max_pair_deviation, std::abs(s[k] - std::conj(s[n - k])));
    report.passed = report.max_pair_deviation < tol && report.dc_imag < tol && report.nyquist_imag < tol;
    return report;
}

} // namespace wgn
