#include "dbmatch/rng.hpp"

#include <boost/random/uniform_int_distribution.hpp>

namespace dbmatch {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(mix64(seed) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  boost::random::uniform_int_distribution<std::uint64_t> dist(0, bound - 1);
  return dist(engine_);
}

}  // namespace dbmatch
