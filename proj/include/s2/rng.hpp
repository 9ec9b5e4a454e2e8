#pragma once

#include <cstdint>

namespace s2 {

/// Independent draw streams. Each concern gets its own stream so that a
/// policy's choices never shift the draws seen by the sources.
enum class Stream : std::uint64_t {
  source = 1,
  channel = 2,
  contention = 3,
  policy = 4,
  setup = 5,
};

namespace detail {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based generator: the draw is a pure function of
/// (seed, stream, node, counter). No state, trivially reproducible.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : seed_(seed) {}

  constexpr std::uint64_t bits(Stream stream, std::uint64_t node,
                               std::uint64_t counter) const {
    std::uint64_t h = detail::mix64(seed_ + 0x9e3779b97f4a7c15ULL);
    h = detail::mix64(h ^ (static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL));
    h = detail::mix64(h ^ (node + 0x632be59bd9b4e019ULL));
    h = detail::mix64(h ^ (counter * 0x9e3779b97f4a7c15ULL + 0x8cb92ba72f3d8dd7ULL));
    return h;
  }

  /// Uniform in [0, 1) with 53 random bits.
  constexpr double uniform(Stream stream, std::uint64_t node,
                           std::uint64_t counter) const {
    return static_cast<double>(bits(stream, node, counter) >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace s2
