#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskfill/error.hpp"
#include "maskfill/corpus.hpp"
#include "maskfill/entity_tagger.hpp"
#include "maskfill/masked_corpus.hpp"

namespace maskfill {

using TokenSet = std::unordered_set<Token>;

enum class MaskTechnique { kAllowList, kVocabThres, kEntityTagger };

/// "allowList", "vocabThres", "entityTagger".
std::string_view technique_name(MaskTechnique technique);
std::optional<MaskTechnique> parse_technique(std::string_view name);

/// Keep only tokens from a curated list.
class AllowListPolicy {
 public:
  /// Throws std::invalid_argument if `allow` is empty. The marker is never
  /// admitted to the set.
  AllowListPolicy(const std::vector<Token>& allow, bool case_fold = false);

  bool keeps(std::string_view token) const;
  const TokenSet& allow_set() const noexcept { return allow_; }
  bool case_fold() const noexcept { return case_fold_; }

 private:
  TokenSet allow_;
  TokenSet folded_;
  bool case_fold_;
};

/// Keep only the `n_keep` most frequent tokens of a reference table.
class VocabThresPolicy {
 public:
  /// Throws std::invalid_argument if n_keep == 0.
  VocabThresPolicy(const FrequencyTable& table, std::size_t n_keep);

  bool keeps(std::string_view token) const { return keep_.contains(Token(token)); }
  const TokenSet& keep_set() const noexcept { return keep_; }
  std::size_t n_keep() const noexcept { return n_keep_; }

 private:
  TokenSet keep_;
  std::size_t n_keep_;
};

/// Mask every token the tagger flags.
struct EntityTaggerPolicy {
  std::shared_ptr<const EntityTagger> tagger;
};

using MaskPolicy = std::variant<AllowListPolicy, VocabThresPolicy, EntityTaggerPolicy>;

MaskTechnique technique_of(const MaskPolicy& policy);

/// Tokens a Top-K fill should avoid for this policy: the allow set, the
/// keep set, or nothing for entity tagging.
std::optional<TokenSet> forbidden_tokens(const MaskPolicy& policy);

MaskedCorpus mask_allowlist(const Corpus& corpus, const AllowListPolicy& policy,
                            unsigned threads = 1);
MaskedCorpus mask_allowlist(const Corpus& corpus, const std::vector<Token>& allow,
                            bool case_fold = false);

MaskedCorpus mask_vocabthres(const Corpus& corpus, const VocabThresPolicy& policy,
                             unsigned threads = 1);
MaskedCorpus mask_vocabthres(const Corpus& corpus, const FrequencyTable& table,
                             std::size_t n_keep);

/// Tagger exceptions and length mismatches surface as MaskingError carrying
/// the sentence index.
MaskedCorpus mask_entities(const Corpus& corpus, const EntityTagger& tagger, unsigned threads = 1);

MaskedCorpus mask_corpus(const Corpus& corpus, const MaskPolicy& policy, unsigned threads = 1);

struct MaskStats {
  std::size_t masked_tokens = 0;
  std::size_t total_tokens = 0;
  double percent_masked = 0.0;  // ratio in [0, 1]

  /// Percentage rounded to one decimal, as printed in report tables.
  double percent_rounded() const;
  /// {"masked": int, "total": int, "percent": float}
  nlohmann::json to_json() const;
};

/// Throws std::invalid_argument on a corpus without tokens.
MaskStats mask_stats(const MaskedCorpus& masked);

}  // namespace maskfill
