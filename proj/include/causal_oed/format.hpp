#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <string>

namespace causal_oed {

/// Shortest round-trip decimal form of x. Output files go through this so
/// byte-level comparisons of runs are meaningful on any platform.
inline std::string format_double(double x) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

}  // namespace causal_oed
