#include "cobra/numeric.hpp"

namespace cobra {

namespace {
constexpr std::size_t kPairwiseBlock = 8;
}

double pairwise_sum(std::span<const double> values) noexcept {
  if (values.size() <= kPairwiseBlock) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double pairwise_mean(std::span<const double> values) noexcept {
  return pairwise_sum(values) / static_cast<double>(values.size());
}

std::mt19937_64 derive_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace cobra
