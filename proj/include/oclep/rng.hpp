#pragma once

#include <cstdint>
#include <random>
#include <unordered_set>
#include <vector>

namespace oclep::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Named sub-streams of the master seed. Every sampling site derives its own
// generator from (master, stream, a, b), so parallel and serial schedules
// produce identical draws.
enum class Stream : std::uint64_t {
  kTrainProbes = 1,   // choosing the probe subset T
  kTrainMining = 2,   // (probe j, sample i) during training
  kScoreMining = 3,   // (test row, sample i) during scoring
};

inline std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return h;
}

// Unbiased draw in [0, n). std::uniform_int_distribution is
// implementation-defined; a fixed rejection scheme keeps runs reproducible
// across toolchains.
inline std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = gen();
    if (x >= threshold) return x % n;
  }
}

// Uniform m-subset of {0, ..., n-1} (Floyd's algorithm, O(m) space).
inline std::vector<std::uint32_t> sample_without_replacement(
    std::mt19937_64& gen, std::uint32_t population, std::uint32_t count) {
  std::vector<std::uint32_t> picked;
  picked.reserve(count);
  std::unordered_set<std::uint32_t> seen;
  seen.reserve(count * 2);
  for (std::uint32_t j = population - count; j < population; ++j) {
    const auto t = static_cast<std::uint32_t>(bounded(gen, j + 1));
    const std::uint32_t pick = seen.count(t) ? j : t;
    seen.insert(pick);
    picked.push_back(pick);
  }
  return picked;
}

// Uniform m-subset of {0, ..., n-1} \ {excluded}.
inline std::vector<std::uint32_t> sample_excluding(std::mt19937_64& gen,
                                                   std::uint32_t population,
                                                   std::uint32_t count,
                                                   std::uint32_t excluded) {
  auto picked = sample_without_replacement(gen, population - 1, count);
  for (auto& idx : picked) {
    if (idx >= excluded) ++idx;
  }
  return picked;
}

}  // namespace oclep::rng
