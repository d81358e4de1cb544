#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <span>

namespace wgn::detail {

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

template <class T>
using FftwArray = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwArray<T> make_fftw_array(std::size_t n)
{
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
    if (p == nullptr) throw std::bad_alloc();
    return FftwArray<T>(p);
}

inline fftw_complex* as_fftw(std::complex<double>* p) noexcept
{
    return reinterpret_cast<fftw_complex*>(p);
}

// Plans are created once per length with FFTW_ESTIMATE (deterministic plan
// choice, so results are reproducible across processes) and executed through
// the new-array interface, which is thread-safe. Buffers always come from
// fftw_malloc so alignment matches the planning arrays.
struct PlanSet {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    fftw_plan real_forward = nullptr;
};

inline const PlanSet& plans_for(std::size_t n)
{
    static std::mutex mutex;
    static std::map<std::size_t, PlanSet> cache;

    std::lock_guard lock(mutex);
    if (auto it = cache.find(n); it != cache.end()) return it->second;

    auto cin = make_fftw_array<std::complex<double>>(n);
    auto cout = make_fftw_array<std::complex<double>>(n);
    auto rin = make_fftw_array<double>(n);
    const int len = static_cast<int>(n);

    PlanSet plans;
    plans.forward = fftw_plan_dft_1d(len, as_fftw(cin.get()), as_fftw(cout.get()), FFTW_FORWARD, FFTW_ESTIMATE);
    plans.backward = fftw_plan_dft_1d(len, as_fftw(cin.get()), as_fftw(cout.get()), FFTW_BACKWARD, FFTW_ESTIMATE);
    plans.real_forward = fftw_plan_dft_r2c_1d(len, rin.get(), as_fftw(cout.get()), FFTW_ESTIMATE);
    return cache.emplace(n, plans).first->second;
}

// Per-thread scratch reused across calls; grows to the largest length seen.
struct Scratch {
    FftwArray<std::complex<double>> a;
    FftwArray<std::complex<double>> b;
    FftwArray<double> r;
    std::size_t capacity = 0;

    void reserve(std::size_t n)
    {
        if (n <= capacity) return;
        a = make_fftw_array<std::complex<double>>(n);
        b = make_fftw_array<std::complex<double>>(n);
        r = make_fftw_array<double>(n);
        capacity = n;
    }
};

inline Scratch& scratch(std::size_t n)
{
    thread_local Scratch s;
    s.reserve(n);
    return s;
}

// Unnormalized complex transform staged through the thread's scratch:
// fill(input) writes the length-n input, read(output) consumes the result.
// sign < 0 uses the e^{-2 pi i jk/N} kernel.
template <class Fill, class Read>
void complex_dft_with(std::size_t n, int sign, Fill fill, Read read)
{
    const PlanSet& plans = plans_for(n);
    Scratch& s = scratch(n);
    fill(std::span<std::complex<double>>(s.a.get(), n));
    fftw_execute_dft(sign < 0 ? plans.forward : plans.backward, as_fftw(s.a.get()), as_fftw(s.b.get()));
    read(std::span<const std::complex<double>>(s.b.get(), n));
}

inline void complex_dft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out, int sign)
{
    complex_dft_with(
        in.size(), sign, [&](std::span<std::complex<double>> a) { std::copy(in.begin(), in.end(), a.begin()); },
        [&](std::span<const std::complex<double>> b) { std::copy(b.begin(), b.end(), out.begin()); });
}

// Unnormalized real-input transform; read(bins) receives bins 0..N/2.
template <class Read>
void real_dft_with(std::span<const double> in, Read read)
{
    const std::size_t n = in.size();
    const PlanSet& plans = plans_for(n);
    Scratch& s = scratch(n);
    std::copy(in.begin(), in.end(), s.r.get());
    fftw_execute_dft_r2c(plans.real_forward, s.r.get(), as_fftw(s.b.get()));
    read(std::span<const std::complex<double>>(s.b.get(), n / 2 + 1));
}

} // namespace wgn::detail
