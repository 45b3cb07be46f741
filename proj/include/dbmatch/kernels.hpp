#pragma once

// Data-parallel inner loops of the matcher and detector. Every kernel has a
// scalar reference implementation; wider variants are selected at runtime
// from the CPU features and must produce bit-identical results.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dbmatch/model.hpp"

namespace dbmatch::kernels {

enum class Backend { kScalar, kAvx2 };

const char* backend_name(Backend b) noexcept;
bool backend_available(Backend b) noexcept;
/// Widest available backend, unless DBMATCH_SIMD=scalar is set in the environment.
Backend default_backend() noexcept;
Backend active_backend() noexcept;
/// Throws ArgumentError if the backend is not available on this CPU/build.
void set_backend(Backend b);

/// Rows interleaved in blocks of kLanes: element (row r, position j) lives at
/// block(r / kLanes)[j * kLanes + r % kLanes]. Padding lanes hold zeros and
/// are excluded through lane_mask().
inline constexpr std::size_t kLanes = 8;

class InterleavedRows {
 public:
  InterleavedRows(std::size_t rows, std::size_t length);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t length() const noexcept { return length_; }
  std::size_t blocks() const noexcept { return (rows_ + kLanes - 1) / kLanes; }

  void set_row(std::size_t r, std::span<const Symbol> values);
  std::span<const Symbol> block(std::size_t b) const noexcept {
    return {data_.data() + b * length_ * kLanes, length_ * kLanes};
  }
  /// Bit l set iff lane l of block b holds a real row.
  std::uint32_t lane_mask(std::size_t b) const noexcept;

 private:
  std::size_t rows_;
  std::size_t length_;
  std::vector<Symbol> data_;
};

/// A subsequence pattern padded for gather access: padded()[size()] is a
/// sentinel that never equals a symbol.
class Pattern {
 public:
  explicit Pattern(std::span<const Symbol> y);

  std::size_t size() const noexcept { return size_; }
  const std::int32_t* padded() const noexcept { return padded_.data(); }

 private:
  std::size_t size_;
  std::vector<std::int32_t> padded_;
};

/// Bit l of the result is set iff y embeds (order-preserving, possibly
/// non-contiguous) into lane l of the block. The block spans
/// length * kLanes symbols.
std::uint32_t contains_block(const Pattern& y, std::span<const Symbol> block, std::size_t length);

/// counts[s] += number of j with keep[j] != 0 and values[j] == s, for
/// s < counts.size(). Symbols >= counts.size() are ignored.
void masked_histogram(std::span<const Symbol> values, std::span<const std::uint8_t> keep,
                      std::span<std::uint32_t> counts);

namespace scalar {
std::uint32_t contains_block(const Pattern& y, std::span<const Symbol> block, std::size_t length);
void masked_histogram(std::span<const Symbol> values, std::span<const std::uint8_t> keep,
                      std::span<std::uint32_t> counts);
}  // namespace scalar

#if defined(DBMATCH_HAVE_AVX2)
namespace avx2 {
std::uint32_t contains_block(const Pattern& y, std::span<const Symbol> block, std::size_t length);
void masked_histogram(std::span<const Symbol> values, std::span<const std::uint8_t> keep,
                      std::span<std::uint32_t> counts);
}  // namespace avx2
#endif

}  // namespace dbmatch::kernels
