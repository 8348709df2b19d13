#pragma once

#include <cstdint>

namespace etv {

inline constexpr std::uint64_t kDefaultSeed = 20220817;

// Every random stream in the pipeline is keyed by (root seed, stage,
// index). The stage tag names the consumer (generator users, model init,
// minibatch shuffling, ...) and index separates repeated uses such as
// experiment replicates or per-fund streams. The mix is SplitMix64
// applied to the root, then folded with stage and index.
enum class SeedStage : std::uint64_t {
  TrueModel = 1,
  Funds = 2,
  TrainUsers = 3,
  TestUsers = 4,
  TrainOutcomes = 5,
  TestOutcomes = 6,
  ModelInit = 7,
  Shuffle = 8,
  Split = 9,
  Replicate = 10,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, SeedStage stage, std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(root) ^ static_cast<std::uint64_t>(stage)) ^ index);
}

}  // namespace etv
