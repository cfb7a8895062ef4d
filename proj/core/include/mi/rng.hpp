#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace mi {

/// SplitMix64 finalizer; bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// xoshiro256** generator (Blackman & Vigna). Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  /// Expands a 64-bit seed through SplitMix64 into the 256-bit state.
  explicit Xoshiro256(std::uint64_t seed) noexcept;
  explicit Xoshiro256(const std::array<std::uint64_t, 4>& state) noexcept : s_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }

 private:
  std::array<std::uint64_t, 4> s_;
};

/// Stage tags used when deriving simulation substreams.
enum class Stage : std::uint64_t {
  kPopulation = 1,
  kResponse = 2,
  kImputation = 3,
};

/// Node in a tree of independent random substreams.
///
/// A key is a 64-bit digest of the path from the root seed; `child(tag)`
/// hashes one more path component in. Derivation never depends on the order
/// in which streams are requested, so work may run on any number of workers.
///
/// Simulation layout:
///   root(seed) / cell(n, r) / replicate(l) / Stage::kPopulation
///   root(seed) / cell(n, r) / replicate(l) / Stage::kResponse
///   root(seed) / cell(n, r) / replicate(l) / Stage::kImputation / method / k
class StreamKey {
 public:
  explicit StreamKey(std::uint64_t root_seed) noexcept;

  StreamKey child(std::uint64_t tag) const noexcept;
  StreamKey child(Stage stage) const noexcept { return child(static_cast<std::uint64_t>(stage)); }
  StreamKey path(std::initializer_list<std::uint64_t> tags) const noexcept;

  Xoshiro256 engine() const noexcept { return Xoshiro256(digest_); }
  std::uint64_t digest() const noexcept { return digest_; }

  friend bool operator==(const StreamKey&, const StreamKey&) = default;

 private:
  struct Raw {};
  StreamKey(Raw, std::uint64_t digest) noexcept : digest_(digest) {}

  std::uint64_t digest_;
};

}  // namespace mi
