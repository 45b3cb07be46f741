// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include <bit>

#include "dbmatch/kernels.hpp"

namespace dbmatch::kernels::avx2 {

namespace {

// Histogram passes cost one compare per symbol, so wide alphabets go scalar.
constexpr std::size_t kMaxVectorAlphabet = 16;

}  // namespace

std::uint32_t contains_block(const Pattern& y, std::span<const Symbol> block, std::size_t length) {
  const auto k = static_cast<std::int32_t>(y.size());
  const __m256i target = _mm256_set1_epi32(k);
  const int* pattern = reinterpret_cast<const int*>(y.padded());
  __m256i pos = _mm256_setzero_si256();
  const Symbol* base = block.data();

  // Each lane advances its own cursor into y; the sentinel at y[k] stops a
  // lane once it has matched the whole pattern.
  for (std::size_t j = 0; j < length; ++j) {
    const __m128i raw = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(base + j * kLanes));
    const __m256i x = _mm256_cvtepu8_epi32(raw);
    const __m256i want = _mm256_i32gather_epi32(pattern, pos, 4);
    pos = _mm256_sub_epi32(pos, _mm256_cmpeq_epi32(x, want));
    if ((j & 7) == 7) {
      const __m256i done = _mm256_cmpeq_epi32(pos, target);
      if (_mm256_movemask_ps(_mm256_castsi256_ps(done)) == 0xff) break;
    }
  }
  const __m256i done = _mm256_cmpeq_epi32(pos, target);
  return static_cast<std::uint32_t>(_mm256_movemask_ps(_mm256_castsi256_ps(done)));
}

void masked_histogram(std::span<const Symbol> values, std::span<const std::uint8_t> keep,
                      std::span<std::uint32_t> counts) {
  const std::size_t q = counts.size();
  if (q > kMaxVectorAlphabet) {
    scalar::masked_histogram(values, keep, counts);
    return;
  }
  const std::size_t n = values.size();
  const std::size_t body = n - n % 32;
  const __m256i zero = _mm256_setzero_si256();
  for (std::size_t j = 0; j < body; j += 32) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(values.data() + j));
    const __m256i kept = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(keep.data() + j));
    const auto keep_bits = ~static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(kept, zero)));
    for (std::size_t s = 0; s < q; ++s) {
      const __m256i eq = _mm256_cmpeq_epi8(v, _mm256_set1_epi8(static_cast<char>(s)));
      const auto bits = static_cast<std::uint32_t>(_mm256_movemask_epi8(eq)) & keep_bits;
      counts[s] += static_cast<std::uint32_t>(std::popcount(bits));
    }
  }
  scalar::masked_histogram(values.subspan(body), keep.subspan(body), counts);
}

}  // namespace dbmatch::kernels::avx2
