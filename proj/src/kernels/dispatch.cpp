#include <atomic>
#include <cstdlib>
#include <string_view>

#include "dbmatch/errors.hpp"
#include "dbmatch/kernels.hpp"

namespace dbmatch::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(DBMATCH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

std::atomic<Backend>& active() {
  static std::atomic<Backend> backend{default_backend()};
  return backend;
}

}  // namespace

const char* backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend b) noexcept {
  return b == Backend::kScalar || (b == Backend::kAvx2 && cpu_has_avx2());
}

Backend default_backend() noexcept {
  if (const char* env = std::getenv("DBMATCH_SIMD"); env != nullptr && std::string_view(env) == "scalar") {
    return Backend::kScalar;
  }
  return cpu_has_avx2() ? Backend::kAvx2 : Backend::kScalar;
}

Backend active_backend() noexcept { return active().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw ArgumentError(std::string("SIMD backend '") + backend_name(b) + "' is not available");
  }
  active().store(b, std::memory_order_relaxed);
}

InterleavedRows::InterleavedRows(std::size_t rows, std::size_t length)
    : rows_(rows), length_(length), data_(((rows + kLanes - 1) / kLanes) * kLanes * length, 0) {}

void InterleavedRows::set_row(std::size_t r, std::span<const Symbol> values) {
  Symbol* base = data_.data() + (r / kLanes) * length_ * kLanes + r % kLanes;
  for (std::size_t j = 0; j < length_; ++j) base[j * kLanes] = values[j];
}

std::uint32_t InterleavedRows::lane_mask(std::size_t b) const noexcept {
  const std::size_t first = b * kLanes;
  const std::size_t live = rows_ - first < kLanes ? rows_ - first : kLanes;
  return (1u << live) - 1u;
}

Pattern::Pattern(std::span<const Symbol> y) : size_(y.size()), padded_(y.size() + 1) {
  for (std::size_t t = 0; t < y.size(); ++t) padded_[t] = y[t];
  padded_[y.size()] = -1;
}

std::uint32_t contains_block(const Pattern& y, std::span<const Symbol> block, std::size_t length) {
#if defined(DBMATCH_HAVE_AVX2)
  if (active_backend() == Backend::kAvx2) return avx2::contains_block(y, block, length);
#endif
  return scalar::contains_block(y, block, length);
}

void masked_histogram(std::span<const Symbol> values, std::span<const std::uint8_t> keep,
                      std::span<std::uint32_t> counts) {
#if defined(DBMATCH_HAVE_AVX2)
  if (active_backend() == Backend::kAvx2) {
    avx2::masked_histogram(values, keep, counts);
    return;
  }
#endif
  scalar::masked_histogram(values, keep, counts);
}

}  // namespace dbmatch::kernels
