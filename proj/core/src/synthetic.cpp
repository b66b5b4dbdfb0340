#include "maskfill/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace maskfill {

TrigramSource::TrigramSource(std::uint64_t seed, SyntheticParams params)
    : seed_(seed), params_(params) {
  if (params_.vocab_size == 0 || params_.fanout == 0) {
    throw std::invalid_argument("synthetic source needs a vocabulary and fanout");
  }
  if (params_.min_length == 0 || params_.max_length < params_.min_length) {
    throw std::invalid_argument("synthetic source has an invalid length range");
  }
  vocab_.reserve(params_.vocab_size);
  double total = 0.0;
  for (std::size_t i = 0; i < params_.vocab_size; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "w%03zu", i);
    vocab_.emplace_back(name);
    total += 1.0 / std::pow(static_cast<double>(i + 1), params_.zipf);
    cumulative_.push_back(total);
  }
  for (auto& c : cumulative_) c /= total;
}

std::vector<std::pair<std::size_t, double>> TrigramSource::successors(long u, long v) const {
  const auto encode = [](long x) { return static_cast<std::uint64_t>(x + 1); };
  Rng rng(splitmix64(splitmix64(seed_ ^ 0x5eed) ^ (encode(u) << 32 | encode(v))));
  std::map<std::size_t, double> weights;
  for (std::size_t i = 0; i < params_.fanout; ++i) {
    const double x = uniform_unit(rng);
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    const auto word = static_cast<std::size_t>(
        std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                 static_cast<std::ptrdiff_t>(vocab_.size()) - 1));
    weights[word] += 0.5 + uniform_unit(rng);
  }
  double total = 0.0;
  for (const auto& [w, x] : weights) total += x;
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(weights.size());
  for (const auto& [w, x] : weights) out.emplace_back(w, x / total);
  return out;
}

Corpus TrigramSource::sample(std::size_t n, std::uint64_t sample_seed) const {
  const RandomSource source(sample_seed);
  std::vector<Sentence> sentences;
  sentences.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = source.stream(i);
    std::vector<Token> tokens;
    long u = -1;
    long v = -1;
    while (tokens.size() < params_.max_length) {
      if (tokens.size() >= params_.min_length && bernoulli(rng, params_.end_prob)) break;
      const auto next = successors(u, v);
      double x = uniform_unit(rng);
      std::size_t pick = next.back().first;
      for (const auto& [word, p] : next) {
        x -= p;
        if (x < 0.0) {
          pick = word;
          break;
        }
      }
      tokens.push_back(vocab_[pick]);
      u = v;
      v = static_cast<long>(pick);
    }
    sentences.push_back({std::move(tokens), i});
  }
  return Corpus(std::move(sentences), "synthetic");
}

}  // namespace maskfill
