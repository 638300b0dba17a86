#pragma once

#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>

#include "memplan/errors.hpp"

namespace memplan {

using byte_count = std::uint64_t;
using token_count = std::uint64_t;

inline constexpr byte_count kGiB = byte_count{1} << 30;

namespace detail {

using u128 = unsigned __int128;

inline u128 mul(u128 a, u128 b) {
    u128 out;
    if (__builtin_mul_overflow(a, b, &out)) throw RangeError("byte-count arithmetic overflow");
    return out;
}

inline u128 add(u128 a, u128 b) {
    u128 out;
    if (__builtin_add_overflow(a, b, &out)) throw RangeError("byte-count arithmetic overflow");
    return out;
}

inline byte_count narrow(u128 v) {
    if (v > std::numeric_limits<byte_count>::max())
        throw RangeError("byte count exceeds 64-bit range");
    return static_cast<byte_count>(v);
}

}  // namespace detail

/// Hundredths of a GiB, rounded half up, computed in integers so the decimal
/// string never depends on floating-point formatting.
inline std::uint64_t gib_hundredths(byte_count bytes) {
    const detail::u128 scaled = static_cast<detail::u128>(bytes) * 100u + (kGiB / 2);
    return static_cast<std::uint64_t>(scaled / kGiB);
}

/// "4.12" for 4,423,680,000 bytes.
inline std::string format_gib(byte_count bytes) {
    const auto h = gib_hundredths(bytes);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%llu.%02llu",
                  static_cast<unsigned long long>(h / 100),
                  static_cast<unsigned long long>(h % 100));
    return buf;
}

inline double to_gib(byte_count bytes) {
    return static_cast<double>(bytes) / static_cast<double>(kGiB);
}

/// Text-mode rendering: "0 B" for zero, otherwise "4.12 GiB (4423680000 B)".
inline std::string format_bytes_human(byte_count bytes) {
    if (bytes == 0) return "0 B";
    return format_gib(bytes) + " GiB (" + std::to_string(bytes) + " B)";
}

}  // namespace memplan
