#include "mi/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

namespace mi {
namespace {

TEST(Xoshiro256, ReferenceOutputsFromKnownState) {
  Xoshiro256 g(std::array<std::uint64_t, 4>{1, 2, 3, 4});
  EXPECT_EQ(g(), 11520u);
  EXPECT_EQ(g(), 0u);
  EXPECT_EQ(g(), 1509978240u);
}

TEST(Xoshiro256, SeedExpansionUsesSplitMix64) {
  EXPECT_EQ(mix64(0x9e3779b97f4a7c15ULL), 0xe220a8397b1dcdafULL);
  const Xoshiro256 g(0);
  EXPECT_EQ(g.state()[0], 0xe220a8397b1dcdafULL);
}

TEST(Xoshiro256, WorksWithStandardDistributions) {
  Xoshiro256 g(42);
  std::uniform_real_distribution<double> u;
  double sum = 0.0;
  constexpr int kDraws = 200000;
  for (int i = 0; i < kDraws; ++i) sum += u(g);
  // Mean of U(0,1) has SD sqrt(1/12/N).
  EXPECT_NEAR(sum / kDraws, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / kDraws));
}

TEST(StreamKey, DerivationIsDeterministicAndOrderFree) {
  const StreamKey root(123);
  EXPECT_EQ(root.child(7).child(3), StreamKey(123).child(7).child(3));
  EXPECT_EQ(root.path({7, 3}), root.child(7).child(3));
  EXPECT_NE(root.child(7).child(3), root.child(3).child(7));
  EXPECT_NE(StreamKey(123), StreamKey(124));
}

TEST(StreamKey, SiblingStreamsAreDistinct) {
  const StreamKey root(2024);
  std::set<std::uint64_t> digests;
  std::set<std::uint64_t> first_outputs;
  for (std::uint64_t k = 0; k < 10000; ++k) {
    const StreamKey child = root.child(k);
    digests.insert(child.digest());
    first_outputs.insert(child.engine()());
  }
  EXPECT_EQ(digests.size(), 10000u);
  EXPECT_EQ(first_outputs.size(), 10000u);
}

TEST(StreamKey, SiblingStreamsAreUncorrelated) {
  const StreamKey root(77);
  std::normal_distribution<double> z;
  constexpr int kPairs = 100000;
  double sxy = 0.0;
  for (int l = 0; l < kPairs; ++l) {
    auto a = root.child(static_cast<std::uint64_t>(l)).child(Stage::kImputation).child(0).engine();
    auto b = root.child(static_cast<std::uint64_t>(l)).child(Stage::kImputation).child(1).engine();
    sxy += z(a) * z(b);
  }
  EXPECT_NEAR(sxy / kPairs, 0.0, 4.0 / std::sqrt(double(kPairs)));
}

}  // namespace
}  // namespace mi
