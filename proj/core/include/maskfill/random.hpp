#pragma once

#include <cstdint>
#include <random>

namespace maskfill {

/// The engine every sampling decision draws from. mt19937_64's output sequence
/// is fixed by the standard, so seeded streams agree across platforms.
using Rng = std::mt19937_64;

/// Deterministic stream factory: one independent stream per
/// (seed, corpus_index, sentence_index), so results do not depend on how
/// sentences are scheduled across threads.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed = 0, std::uint64_t corpus_index = 0)
      : seed_(seed), corpus_index_(corpus_index) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t corpus_index() const noexcept { return corpus_index_; }

  Rng stream(std::uint64_t sentence_index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t corpus_index_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform integer in [0, n). Does not consume the engine when n == 1.
/// Implemented by rejection so results are identical on every standard library.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Uniform double in [0, 1) with 53 random bits.
double uniform_unit(Rng& rng);

/// Bernoulli(p) draw built on uniform_unit.
bool bernoulli(Rng& rng, double p);

}  // namespace maskfill
