#pragma once

// Independent reference implementations used as test oracles. Nothing here
// calls into the FFT backend.

#include "wgn/random.hpp"
#include "wgn/spectral_map.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace wgn::test {

/// O(N^2) unitary DFT; sign -1 is the forward kernel e^{-2 pi i jk/N}.
inline std::vector<Complex> naive_dft(const std::vector<Complex>& in, int sign)
{
    const std::size_t n = in.size();
    std::vector<Complex> out(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        long double re = 0.0L;
        long double im = 0.0L;
        for (std::size_t j = 0; j < n; ++j) {
            // Reduce jk mod N before the angle to keep the argument small.
            const auto phase = static_cast<long double>((j * k) % n);
            const long double angle = sign * 2.0L * std::numbers::pi_v<long double> * phase / n;
            const long double c = std::cos(angle);
            const long double s = std::sin(angle);
            re += in[j].real() * c - in[j].imag() * s;
            im += in[j].real() * s + in[j].imag() * c;
        }
        out[k] = Complex(static_cast<double>(re) * scale, static_cast<double>(im) * scale);
    }
    return out;
}

inline std::vector<Complex> naive_dft(const std::vector<double>& x)
{
    return naive_dft(std::vector<Complex>(x.begin(), x.end()), -1);
}

inline std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double scale = 1.0)
{
    Engine engine(seed);
    std::vector<double> v(n);
    fill_standard_normal(v, engine);
    for (double& d : v) d *= scale;
    return v;
}

inline std::vector<Complex> complex_gaussian(std::size_t n, std::uint64_t seed)
{
    Engine engine(seed);
    std::vector<Complex> v(n);
    for (Complex& c : v) c = standard_complex_normal(engine);
    return v;
}

inline double norm_sq(const std::vector<double>& v)
{
    double s = 0.0;
    for (double d : v) s += d * d;
    return s;
}

inline double norm_sq(const std::vector<Complex>& v)
{
    double s = 0.0;
    for (const Complex& c : v) s += std::norm(c);
    return s;
}

/// Central-difference gradient of f at x with step h.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h)
{
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double up = f(x);
        x[i] = saved - h;
        const double down = f(x);
        x[i] = saved;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// Central-difference gradient of the chi negative log-density of ||x||, up to
/// its additive constant, evaluated in long double. Near the mode ||x||^2 = N - 1
/// the gradient is small and a double-precision difference of the O(N) loss
/// value is dominated by roundoff.
inline std::vector<double> chi_loss_central_difference(const std::vector<double>& x, double h)
{
    const auto n = static_cast<long double>(x.size());
    long double r2 = 0.0L;
    for (double v : x) r2 += static_cast<long double>(v) * v;
    auto loss = [&](long double rr) { return -((n - 1.0L) * 0.5L * std::log(rr) - 0.5L * rr); };
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const long double xi = x[i];
        const long double up = r2 - xi * xi + (xi + h) * (xi + h);
        const long double down = r2 - xi * xi + (xi - h) * (xi - h);
        g[i] = static_cast<double>((loss(up) - loss(down)) / (2.0L * h));
    }
    return g;
}

/// max_i |a_i - b_i| / max(max_i |b_i|, floor).
inline double relative_max_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-12)
{
    double err = 0.0;
    double ref = floor;
    for (std::size_t i = 0; i < a.size(); ++i) {
        err = std::max(err, std::abs(a[i] - b[i]));
        ref = std::max(ref, std::abs(b[i]));
    }
    return err / ref;
}

} // namespace wgn::test
