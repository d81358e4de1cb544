#include "support.hpp"

#include "wgn/spectral_map.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

using namespace wgn;
using wgn::test::gaussian;
using wgn::test::norm_sq;

namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST(LatentVector, RejectsOddShortAndNonFinite)
{
    EXPECT_THROW(LatentVector(std::vector<double>(3, 1.0)), DimensionError);
    EXPECT_THROW(LatentVector(std::vector<double>{}), DimensionError);
    EXPECT_THROW(LatentVector(std::vector<double>{1.0}), DimensionError);
    EXPECT_THROW(LatentVector(std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()}), ValidationError);
    EXPECT_THROW(LatentVector(std::vector<double>{std::numeric_limits<double>::infinity(), 0.0}), ValidationError);
    EXPECT_NO_THROW(LatentVector(std::vector<double>{1.0, 2.0}));
}

TEST(CompactSpectrum, RejectsEmptyAndNonFinite)
{
    EXPECT_THROW(CompactSpectrum(std::vector<Complex>{}), DimensionError);
    EXPECT_THROW(CompactSpectrum(std::vector<Complex>{Complex(0.0, std::numeric_limits<double>::infinity())}),
                 ValidationError);
}

TEST(DftUnitary, ConstantVectorHasOnlyDc)
{
    const HermitianSpectrum s = dft_unitary(LatentVector({1.0, 1.0, 1.0, 1.0}));
    ASSERT_EQ(s.size(), 4u);
    EXPECT_NEAR(s[0].real(), 2.0, 1e-15);
    EXPECT_NEAR(s[0].imag(), 0.0, 1e-15);
    for (std::size_t k = 1; k < 4; ++k) EXPECT_NEAR(std::abs(s[k]), 0.0, 1e-15);
}

TEST(DftUnitary, ZerosMapToZeros)
{
    const HermitianSpectrum s = dft_unitary(LatentVector::zeros(16));
    for (const Complex& c : s.coeffs()) EXPECT_EQ(c, Complex(0.0, 0.0));
}

TEST(DftUnitary, MatchesNaiveDft)
{
    for (std::size_t n : {2u, 6u, 64u, 250u}) {
        const std::vector<double> x = gaussian(n, 11 + n);
        const std::vector<Complex> reference = wgn::test::naive_dft(x);
        const HermitianSpectrum s = dft_unitary(LatentVector(x));
        for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(std::abs(s[k] - reference[k]), 0.0, 1e-12) << "n=" << n;
    }
}

TEST(DftUnitary, ParsevalHolds)
{
    const std::vector<double> x = gaussian(1024, 3);
    const HermitianSpectrum s = dft_unitary(LatentVector(x));
    const double xsq = norm_sq(x);
    const double ssq = norm_sq(std::vector<Complex>(s.coeffs().begin(), s.coeffs().end()));
    EXPECT_LT(std::abs(ssq - xsq), 1e-10 * xsq);
}

TEST(IdftUnitary, InvertsDft)
{
    const std::vector<Complex> z = wgn::test::complex_gaussian(96, 5);
    const std::vector<Complex> reference = wgn::test::naive_dft(z, +1);
    const std::vector<Complex> back = idft_unitary(z);
    for (std::size_t j = 0; j < z.size(); ++j) EXPECT_NEAR(std::abs(back[j] - reference[j]), 0.0, 1e-12);
    EXPECT_THROW(idft_unitary(std::vector<Complex>{}), DimensionError);
}

TEST(ToCompact, PacksDcAndNyquistIntoFirstCoefficient)
{
    // Build x from a chosen Hermitian spectrum [a, c, b, conj(c)] with the
    // naive inverse, then read the packing back.
    const double a = 1.25;
    const double b = -0.5;
    const Complex c(0.75, -2.0);
    const std::vector<Complex> xhat{a, c, b, std::conj(c)};
    std::vector<double> x;
    for (const Complex& v : wgn::test::naive_dft(xhat, +1)) x.push_back(v.real());

    const CompactSpectrum y = to_compact(LatentVector(x));
    ASSERT_EQ(y.size(), 2u);
    EXPECT_NEAR(y[0].real(), a / std::numbers::sqrt2, 1e-14);
    EXPECT_NEAR(y[0].imag(), b / std::numbers::sqrt2, 1e-14);
    EXPECT_NEAR(std::abs(y[1] - c), 0.0, 1e-14);
}

TEST(ToCompact, MatchesNaiveDftPacking)
{
    const std::size_t n = 128;
    const std::vector<double> x = gaussian(n, 17);
    const std::vector<Complex> xhat = wgn::test::naive_dft(x);
    const CompactSpectrum y = to_compact(LatentVector(x));
    EXPECT_NEAR(y[0].real(), xhat[0].real() / std::numbers::sqrt2, 1e-12);
    EXPECT_NEAR(y[0].imag(), xhat[n / 2].real() / std::numbers::sqrt2, 1e-12);
    for (std::size_t k = 1; k < n / 2; ++k) EXPECT_NEAR(std::abs(y[k] - xhat[k]), 0.0, 1e-12);
}

TEST(ToCompact, ZerosMapToZeros)
{
    const CompactSpectrum y = to_compact(LatentVector::zeros(32));
    EXPECT_EQ(y.size(), 16u);
    for (const Complex& c : y.coeffs()) EXPECT_EQ(c, Complex(0.0, 0.0));
}

TEST(ToCompact, NormIsHalvedUnderCompaction)
{
    const std::vector<double> x = gaussian(64, 23);
    const CompactSpectrum y = to_compact(LatentVector(x));
    const double xsq = norm_sq(x);
    const double ysq = norm_sq(std::vector<Complex>(y.coeffs().begin(), y.coeffs().end()));
    EXPECT_LT(std::abs(xsq - 2.0 * ysq), 1e-10 * xsq);
}

TEST(ToCompact, IsRealLinear)
{
    const std::vector<double> x1 = gaussian(256, 29);
    const std::vector<double> x2 = gaussian(256, 31);
    const double a = 1.7;
    const double b = -0.3;
    std::vector<double> mix(256);
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x1[i] + b * x2[i];

    const CompactSpectrum y1 = to_compact(LatentVector(x1));
    const CompactSpectrum y2 = to_compact(LatentVector(x2));
    const CompactSpectrum ym = to_compact(LatentVector(mix));
    double err = 0.0;
    double ref = 0.0;
    for (std::size_t k = 0; k < ym.size(); ++k) {
        const Complex expected = a * y1[k] + b * y2[k];
        err = std::max(err, std::abs(ym[k] - expected));
        ref = std::max(ref, std::abs(expected));
    }
    EXPECT_LT(err, 1e-12 * ref);
}

TEST(FromCompact, RoundTripRecoversLatent)
{
    for (std::size_t n : {2u, 8u, 1024u, 65536u}) {
        const LatentVector x(gaussian(n, 41 + n));
        const LatentVector back = from_compact(to_compact(x));
        EXPECT_LT(max_abs_diff(back.values(), x.values()), 1e-10) << "n=" << n;
    }
}

TEST(FromCompact, ZerosMapToZeros)
{
    const LatentVector x = from_compact(CompactSpectrum::zeros(8));
    EXPECT_EQ(x, LatentVector::zeros(16));
}

TEST(FromCompact, NormIsDoubled)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::vector<Complex> z = wgn::test::complex_gaussian(64 + 8 * seed, 100 + seed);
        const double zsq = norm_sq(z);
        const LatentVector x = from_compact(CompactSpectrum(std::move(z)));
        const double xsq = norm_sq(x.vector());
        EXPECT_LT(std::abs(xsq - 2.0 * zsq), 1e-10 * xsq);
    }
}

TEST(FromCompact, InvertsToCompactFromTheSpectrumSide)
{
    const std::vector<Complex> z = wgn::test::complex_gaussian(50, 7);
    const CompactSpectrum back = to_compact(from_compact(CompactSpectrum(z)));
    for (std::size_t k = 0; k < z.size(); ++k) EXPECT_NEAR(std::abs(back[k] - z[k]), 0.0, 1e-12);
}

TEST(FromCompact, MapsComplexGaussianToStandardGaussian)
{
    constexpr std::size_t n = 8;
    constexpr std::size_t draws = 1000000;
    Engine engine(2024);
    std::vector<double> mean(n, 0.0);
    std::vector<double> second(n * n, 0.0);
    std::vector<Complex> z(n / 2);
    for (std::size_t d = 0; d < draws; ++d) {
        for (Complex& c : z) c = standard_complex_normal(engine);
        const LatentVector x = from_compact(CompactSpectrum(z));
        for (std::size_t i = 0; i < n; ++i) {
            mean[i] += x[i];
            for (std::size_t j = 0; j < n; ++j) second[i * n + j] += x[i] * x[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        mean[i] /= draws;
        EXPECT_LE(std::abs(mean[i]), 0.005);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double cov = second[i * n + j] / draws - mean[i] * mean[j];
            EXPECT_LE(std::abs(cov - (i == j ? 1.0 : 0.0)), 0.01) << i << ',' << j;
        }
}

TEST(CheckHermitian, PassesForRealInput)
{
    const HermitianReport r = check_hermitian(dft_unitary(LatentVector(gaussian(256, 1))), 1e-10);
    EXPECT_TRUE(r.passed);
}

TEST(CheckHermitian, DetectsConstructedViolation)
{
    const HermitianSpectrum s = dft_unitary(LatentVector(gaussian(64, 2)));
    std::vector<Complex> broken(s.coeffs().begin(), s.coeffs().end());
    broken[1] += Complex(1e-3, 0.0);
    const HermitianReport r = check_hermitian(HermitianSpectrum(broken), 1e-6);
    EXPECT_FALSE(r.passed);
    EXPECT_NEAR(r.max_pair_deviation, 1e-3, 1e-12);
}

TEST(CheckHermitian, FlagsImaginaryDcAndNyquist)
{
    std::vector<Complex> s(8);
    s[0] = Complex(1.0, 1e-3);
    EXPECT_FALSE(check_hermitian(HermitianSpectrum(s), 1e-6).passed);
    s[0] = 1.0;
    s[4] = Complex(0.0, -1e-3);
    const HermitianReport r = check_hermitian(HermitianSpectrum(s), 1e-6);
    EXPECT_FALSE(r.passed);
    EXPECT_DOUBLE_EQ(r.nyquist_imag, 1e-3);
}

TEST(CheckHermitian, LargeRealInputStaysSymmetric)
{
    const HermitianReport r = check_hermitian(dft_unitary(LatentVector(gaussian(65536, 9))), 1e-9);
    EXPECT_TRUE(r.passed);
    EXPECT_LT(r.max_pair_deviation, 1e-9);
}

TEST(CheckHermitian, RejectsNonPositiveTolerance)
{
    const HermitianSpectrum s = dft_unitary(LatentVector::zeros(4));
    EXPECT_THROW(check_hermitian(s, 0.0), ValidationError);
    EXPECT_THROW(check_hermitian(s, -1.0), ValidationError);
}
