// Copyright 2026 The rydcrit Authors
// SPDX-License-Identifier: Apache-2.0

// Little-endian primitives for the checkpoint formats.

#pragma once

#include <rydcrit/errors.hpp>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace rydcrit::binary {

template <class UInt>
void write_le(std::ostream& os, UInt value) {
    std::array<char, sizeof(UInt)> bytes{};
    for (std::size_t i = 0; i < sizeof(UInt); ++i)
        bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
    os.write(bytes.data(), bytes.size());
}

template <class UInt>
UInt read_le(std::istream& is) {
    std::array<unsigned char, sizeof(UInt)> bytes{};
    is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!is) throw ConfigError("checkpoint truncated");
    UInt value = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) value |= static_cast<UInt>(bytes[i]) << (8 * i);
    return value;
}

inline void write_f64(std::ostream& os, double x) { write_le(os, std::bit_cast<std::uint64_t>(x)); }
inline double read_f64(std::istream& is) { return std::bit_cast<double>(read_le<std::uint64_t>(is)); }

inline void write_magic(std::ostream& os, const char (&magic)[5]) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char (&magic)[5]) {
    char got[4] = {};
    is.read(got, 4);
    if (!is || std::memcmp(got, magic, 4) != 0)
        throw ConfigError(std::string("bad checkpoint magic (expected ") + magic + ")");
}

/// 64-bit FNV-1a, used for stable content identifiers (not for security).
[[nodiscard]] inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

[[nodiscard]] inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    return s;
}

} // namespace rydcrit::binary
