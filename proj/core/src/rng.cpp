#include "mi/rng.hpp"

namespace mi {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kRootSalt = 0x6a09e667f3bcc909ULL;
constexpr std::uint64_t kChildSalt = 0xbb67ae8584caa73bULL;

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Xoshiro256::Xoshiro256(std::uint64_t seed) noexcept {
  for (auto& word : s_) {
    seed += kGolden;
    word = mix64(seed);
  }
}

Xoshiro256::result_type Xoshiro256::operator()() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

StreamKey::StreamKey(std::uint64_t root_seed) noexcept : digest_(mix64(root_seed ^ kRootSalt)) {}

StreamKey StreamKey::child(std::uint64_t tag) const noexcept {
  // Two rounds so that (parent, tag) pairs differing in one bit diverge fully.
  const std::uint64_t h = mix64(digest_ + kChildSalt) ^ mix64(tag * kGolden + kChildSalt);
  return StreamKey(Raw{}, mix64(h));
}

StreamKey StreamKey::path(std::initializer_list<std::uint64_t> tags) const noexcept {
  StreamKey key = *this;
  for (std::uint64_t t : tags) key = key.child(t);
  return key;
}

}  // namespace mi
