#pragma once

#include <cstdint>
#include <vector>

#include "maskfill/corpus.hpp"
#include "maskfill/random.hpp"

namespace maskfill {

struct SyntheticParams {
  std::size_t vocab_size = 200;
  /// Zipf exponent of the base distribution successors are drawn from.
  double zipf = 1.0;
  /// Successor draws per context (duplicates merge, so the support may be smaller).
  std::size_t fanout = 6;
  /// Per-step probability of ending a sentence once min_length is reached.
  double end_prob = 1.0 / 12.0;
  std::size_t min_length = 3;
  std::size_t max_length = 40;
};

/// A known second-order Markov source over the words w000..w{N-1}. Each
/// context (u, v) gets a sparse successor distribution derived only from
/// (seed, u, v), so the source is fully determined by its seed.
class TrigramSource {
 public:
  explicit TrigramSource(std::uint64_t seed, SyntheticParams params = {});

  const std::vector<Token>& vocabulary() const noexcept { return vocab_; }
  const SyntheticParams& params() const noexcept { return params_; }

  /// Successor word indices and their probabilities for context (u, v);
  /// index -1 stands for <s>.
  std::vector<std::pair<std::size_t, double>> successors(long u, long v) const;

  /// `n` sentences; sentence i draws from RandomSource(sample_seed).stream(i).
  Corpus sample(std::size_t n, std::uint64_t sample_seed) const;

 private:
  std::uint64_t seed_;
  SyntheticParams params_;
  std::vector<Token> vocab_;
  std::vector<double> cumulative_;
};

}  // namespace maskfill
