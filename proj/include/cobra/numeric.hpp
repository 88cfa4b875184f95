#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace cobra {

/// Pairwise (cascade) summation; error grows O(log n) instead of O(n).
double pairwise_sum(std::span<const double> values) noexcept;

/// pairwise_sum / n; n must be positive.
double pairwise_mean(std::span<const double> values) noexcept;

/// Generator for stream `index` under `seed`. Streams are derived by
/// counter, so the draws of one stream never depend on how many other
/// streams were consumed or in what order.
std::mt19937_64 derive_stream(std::uint64_t seed, std::uint64_t index);

}  // namespace cobra
