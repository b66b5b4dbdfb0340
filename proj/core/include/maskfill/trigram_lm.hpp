#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskfill/error.hpp"
#include "maskfill/corpus.hpp"

namespace maskfill {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

/// True for <s>, </s> and <unk>; such literals in a corpus are read as <unk>.
bool is_technical_symbol(std::string_view token);

/// How a training corpus is interpreted.
///  - kOracle / kObfuscated: the corpus must not contain markers.
///  - kBaseline0: "[MASK]" is an ordinary vocabulary item.
///  - kBaseline1: events predicting "[MASK]" are dropped; markers stay in
///    contexts.
enum class TrainingMode { kOracle, kBaseline0, kBaseline1, kObfuscated };

std::string_view mode_name(TrainingMode mode);
std::optional<TrainingMode> parse_mode(std::string_view name);

struct LmParams {
  double lambda3 = 0.5;
  double lambda2 = 0.5;
  double lambda1 = 0.5;
  std::size_t min_count = 1;

  bool operator==(const LmParams&) const = default;
};

/// Raw n-gram statistics keyed by token strings, in sorted order.
struct NgramCounts {
  /// Predictable word types (excluding <unk> and </s>, which are implicit).
  std::set<Token> vocab;
  /// Symbols seen only as context (the marker under kBaseline1).
  std::set<Token> context_only;
  std::map<Token, double> unigrams;
  std::map<std::pair<Token, Token>, double> bigrams;
  std::map<std::tuple<Token, Token, Token>, double> trigrams;

  bool operator==(const NgramCounts&) const = default;
};

/// Counts `corpus` under `mode`. Tokens seen fewer than `min_count` times
/// become <unk>. Throws LmError on an empty corpus or a marker in a mode
/// that forbids it.
NgramCounts count_ngrams(const Corpus& corpus, TrainingMode mode, std::size_t min_count);

/// Interpolated trigram model:
///   P(w|u,v) = l3(uv) f3 + (1 - l3(uv)) [l2(v) f2 + (1 - l2(v)) [l1 f1 + (1 - l1) / |V+</s>|]]
/// where a context weight is zeroed for contexts never seen in training and
/// the f's are maximum-likelihood ratios. Immutable once built.
class TrigramLM {
 public:
  using Id = std::uint32_t;
  static constexpr Id kBosId = 0;
  static constexpr Id kEosId = 1;
  static constexpr Id kUnkId = 2;

  TrigramLM(NgramCounts counts, LmParams params, std::optional<TrainingMode> mode = std::nullopt);

  /// Maps a token to its id; unknown tokens map to <unk>.
  Id id_of(std::string_view token) const;
  const Token& token_of(Id id) const { return symbols_[id]; }
  std::size_t symbol_count() const noexcept { return symbols_.size(); }
  bool is_predictable(Id id) const { return predictable_[id]; }
  /// |V ∪ {</s>}|: the size of the predicted event space.
  std::size_t predicted_size() const noexcept { return predicted_size_; }
  /// Every predictable symbol, including <unk> and </s>.
  std::vector<Token> predicted_vocabulary() const;
  bool in_vocabulary(std::string_view token) const;

  double prob(Id w, Id u, Id v) const;
  /// P(w | u, v) on token strings (use "<s>" for padding, "</s>" for the end).
  double prob(std::string_view w, std::string_view u, std::string_view v) const;

  const NgramCounts& counts() const noexcept { return counts_; }
  const LmParams& params() const noexcept { return params_; }
  /// Not persisted in snapshots.
  std::optional<TrainingMode> mode() const noexcept { return mode_; }

  /// Byte-reproducible text serialization.
  std::string snapshot() const;
  static TrigramLM from_snapshot(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static TrigramLM load(const std::filesystem::path& path);

 private:
  static std::uint64_t key2(Id v, Id w) { return (std::uint64_t{v} << 32) | w; }
  static std::uint64_t key3(Id u, Id v, Id w) {
    return (std::uint64_t{u} << 42) | (std::uint64_t{v} << 21) | w;
  }

  NgramCounts counts_;
  LmParams params_;
  std::optional<TrainingMode> mode_;

  std::vector<Token> symbols_;
  std::vector<bool> predictable_;
  std::unordered_map<Token, Id> ids_;
  std::size_t predicted_size_ = 0;

  std::vector<double> unigram_;
  double unigram_total_ = 0.0;
  std::unordered_map<std::uint64_t, double> bigram_;
  std::unordered_map<Id, double> bigram_context_;
  std::unordered_map<std::uint64_t, double> trigram_;
  std::unordered_map<std::uint64_t, double> trigram_context_;
};

TrigramLM train_lm(const Corpus& corpus, TrainingMode mode, const LmParams& params = {});

/// Count-space adaptation: counts = alpha * in_domain + (1 - alpha) * background.
/// The in-domain vocabulary is always kept; the background vocabulary joins
/// it when alpha < 1. The in-domain corpus is counted under `mode` with the
/// background's min_count.
TrigramLM adapt_lm(const TrigramLM& background, const Corpus& in_domain, double alpha,
                   TrainingMode mode);

/// Weighted sum of two count tables; entries with zero weight are dropped.
NgramCounts mix_counts(const NgramCounts& a, double weight_a, const NgramCounts& b,
                       double weight_b);

struct PerplexityReport {
  double perplexity = 0.0;
  std::size_t token_count = 0;  // predicted events, </s> included
  double oov_rate = 0.0;        // fraction of predicted events mapped to <unk>
  double log_prob = 0.0;        // natural-log sum

  /// {"ppl": float, "tokens": int, "oov_rate": float}
  nlohmann::json to_json() const;
};

/// Per-sentence log probabilities are summed in sentence order, so the
/// result does not depend on `threads`.
PerplexityReport perplexity(const TrigramLM& lm, const Corpus& test, unsigned threads = 1);

/// Natural-log probability of one sentence including its </s>.
double sentence_log_prob(const TrigramLM& lm, const Sentence& sentence,
                         std::size_t* oov_count = nullptr);

}  // namespace maskfill
