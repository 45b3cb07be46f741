#include "dbmatch/kernels.hpp"

namespace dbmatch::kernels::scalar {

std::uint32_t contains_block(const Pattern& y, std::span<const Symbol> block, std::size_t length) {
  const std::size_t k = y.size();
  const std::int32_t* pattern = y.padded();
  std::uint32_t result = 0;
  for (std::size_t lane = 0; lane < kLanes; ++lane) {
    std::size_t pos = 0;
    for (std::size_t j = 0; j < length && pos < k; ++j) {
      if (static_cast<std::int32_t>(block[j * kLanes + lane]) == pattern[pos]) ++pos;
    }
    if (pos == k) result |= 1u << lane;
  }
  return result;
}

void masked_histogram(std::span<const Symbol> values, std::span<const std::uint8_t> keep,
                      std::span<std::uint32_t> counts) {
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (keep[j] && values[j] < counts.size()) ++counts[values[j]];
  }
}

}  // namespace dbmatch::kernels::scalar
