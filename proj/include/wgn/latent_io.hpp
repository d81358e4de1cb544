#pragma once

// WGNL latent files:
//
//   offset 0   "WGNL"
//   offset 4   u32 LE version (= 1)
//   offset 8   u64 LE N
//   offset 16  N x f64 LE
//
// Bytes are assembled explicitly so the format does not depend on host
// endianness.

#include "wgn/error.hpp"
#include "wgn/spectral_map.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wgn {

inline constexpr std::array<char, 4> kLatentMagic{'W', 'G', 'N', 'L'};
inline constexpr std::uint32_t kLatentVersion = 1;
inline constexpr std::size_t kLatentHeaderSize = 16;

namespace detail {

template <class U>
void put_le(std::vector<unsigned char>& out, U value)
{
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<unsigned char>(value >> (8 * i)));
}

template <class U>
U get_le(const unsigned char* p)
{
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(p[i]) << (8 * i);
    return value;
}

} // namespace detail

inline std::vector<unsigned char> encode_latent(const LatentVector& x)
{
    std::vector<unsigned char> out;
    out.reserve(kLatentHeaderSize + 8 * x.size());
    out.insert(out.end(), kLatentMagic.begin(), kLatentMagic.end());
    detail::put_le<std::uint32_t>(out, kLatentVersion);
    detail::put_le<std::uint64_t>(out, x.size());
    for (double v : x.values()) detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

/// Throws FormatError on a bad header, wrong version, or size mismatch,
/// DimensionError for odd N, ValidationError for non-finite payload values.
inline LatentVector decode_latent(std::span<const unsigned char> bytes)
{
    if (bytes.size() < kLatentHeaderSize)
        throw FormatError("truncated WGNL header (" + std::to_string(bytes.size()) + " bytes)");
    if (std::memcmp(bytes.data(), kLatentMagic.data(), kLatentMagic.size()) != 0)
        throw FormatError("bad magic, expected \"WGNL\"");
    const auto version = detail::get_le<std::uint32_t>(bytes.data() + 4);
    if (version != kLatentVersion) throw FormatError("unsupported WGNL version " + std::to_string(version));
    const auto n = detail::get_le<std::uint64_t>(bytes.data() + 8);

    const std::size_t payload = bytes.size() - kLatentHeaderSize;
    if (n > payload / 8 || payload != 8 * n)
        throw FormatError("WGNL header declares N = " + std::to_string(n) + " but payload holds " +
                          std::to_string(payload) + " bytes");

    std::vector<double> values(n);
    const unsigned char* p = bytes.data() + kLatentHeaderSize;
    for (std::size_t i = 0; i < n; ++i) values[i] = std::bit_cast<double>(detail::get_le<std::uint64_t>(p + 8 * i));
    return LatentVector(std::move(values));
}

inline void write_latent(const std::filesystem::path& path, const LatentVector& x)
{
    const std::vector<unsigned char> bytes = encode_latent(x);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline LatentVector read_latent(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode_latent(bytes);
}

} // namespace wgn
