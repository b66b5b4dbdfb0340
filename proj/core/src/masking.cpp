#include "maskfill/masking.hpp"

#include <cmath>
#include <stdexcept>

#include "maskfill/error.hpp"
#include "maskfill/parallel.hpp"
#include "maskfill/unicode.hpp"

namespace maskfill {
namespace {

template <class Keep>
MaskedCorpus mask_with(const Corpus& corpus, unsigned threads, Keep&& keep) {
  std::vector<MaskedSentence> out(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    const Sentence& sentence = corpus[i];
    std::vector<Token> tokens;
    tokens.reserve(sentence.tokens.size());
    for (const auto& token : sentence.tokens) {
      tokens.push_back(!is_mask(token) && keep(token) ? token : Token(kMaskToken));
    }
    out[i] = MaskedSentence(std::move(tokens), sentence.index);
  });
  return MaskedCorpus(std::move(out), corpus.source_id());
}

}  // namespace

std::string_view technique_name(MaskTechnique technique) {
  switch (technique) {
    case MaskTechnique::kAllowList:
      return "allowList";
    case MaskTechnique::kVocabThres:
      return "vocabThres";
    case MaskTechnique::kEntityTagger:
      return "entityTagger";
  }
  return "unknown";
}

std::optional<MaskTechnique> parse_technique(std::string_view name) {
  for (auto t : {MaskTechnique::kAllowList, MaskTechnique::kVocabThres,
                 MaskTechnique::kEntityTagger}) {
    if (technique_name(t) == name) return t;
  }
  return std::nullopt;
}

AllowListPolicy::AllowListPolicy(const std::vector<Token>& allow, bool case_fold)
    : case_fold_(case_fold) {
  for (const auto& token : allow) {
    if (is_mask(token)) continue;
    allow_.insert(token);
    if (case_fold_) folded_.insert(unicode::fold_case(token));
  }
  if (allow_.empty()) throw std::invalid_argument("allow list must not be empty");
}

bool AllowListPolicy::keeps(std::string_view token) const {
  if (is_mask(token)) return false;
  if (case_fold_) return folded_.contains(unicode::fold_case(token));
  return allow_.contains(Token(token));
}

VocabThresPolicy::VocabThresPolicy(const FrequencyTable& table, std::size_t n_keep)
    : n_keep_(n_keep) {
  if (n_keep == 0) throw std::invalid_argument("vocabThres n_keep must be at least 1");
  // The marker never competes for a keep slot.
  std::map<Token, std::uint64_t> counts = table.counts();
  counts.erase(Token(kMaskToken));
  for (auto& token : FrequencyTable(std::move(counts)).most_frequent(n_keep)) {
    keep_.insert(std::move(token));
  }
}

MaskTechnique technique_of(const MaskPolicy& policy) {
  return static_cast<MaskTechnique>(policy.index());
}

std::optional<TokenSet> forbidden_tokens(const MaskPolicy& policy) {
  if (const auto* allow = std::get_if<AllowListPolicy>(&policy)) return allow->allow_set();
  if (const auto* vocab = std::get_if<VocabThresPolicy>(&policy)) return vocab->keep_set();
  return std::nullopt;
}

MaskedCorpus mask_allowlist(const Corpus& corpus, const AllowListPolicy& policy, unsigned threads) {
  return mask_with(corpus, threads, [&](const Token& t) { return policy.keeps(t); });
}

MaskedCorpus mask_allowlist(const Corpus& corpus, const std::vector<Token>& allow, bool case_fold) {
  return mask_allowlist(corpus, AllowListPolicy(allow, case_fold));
}

MaskedCorpus mask_vocabthres(const Corpus& corpus, const VocabThresPolicy& policy,
                             unsigned threads) {
  return mask_with(corpus, threads, [&](const Token& t) { return policy.keeps(t); });
}

MaskedCorpus mask_vocabthres(const Corpus& corpus, const FrequencyTable& table,
                             std::size_t n_keep) {
  return mask_vocabthres(corpus, VocabThresPolicy(table, n_keep));
}

MaskedCorpus mask_entities(const Corpus& corpus, const EntityTagger& tagger, unsigned threads) {
  std::vector<MaskedSentence> out(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    const Sentence& sentence = corpus[i];
    std::vector<bool> flags;
    try {
      flags = tagger.tag(sentence);
    } catch (const std::exception& e) {
      throw MaskingError(std::string("entity tagger failed: ") + e.what(), sentence.index);
    }
    if (flags.size() != sentence.tokens.size()) {
      throw MaskingError("entity tagger returned " + std::to_string(flags.size()) +
                             " flags for " + std::to_string(sentence.tokens.size()) + " tokens",
                         sentence.index);
    }
    std::vector<Token> tokens;
    tokens.reserve(sentence.tokens.size());
    for (std::size_t j = 0; j < flags.size(); ++j) {
      tokens.push_back(flags[j] ? Token(kMaskToken) : sentence.tokens[j]);
    }
    out[i] = MaskedSentence(std::move(tokens), sentence.index);
  });
  return MaskedCorpus(std::move(out), corpus.source_id());
}

MaskedCorpus mask_corpus(const Corpus& corpus, const MaskPolicy& policy, unsigned threads) {
  return std::visit(
      [&](const auto& p) -> MaskedCorpus {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, AllowListPolicy>) {
          return mask_allowlist(corpus, p, threads);
        } else if constexpr (std::is_same_v<P, VocabThresPolicy>) {
          return mask_vocabthres(corpus, p, threads);
        } else {
          if (!p.tagger) throw std::invalid_argument("entityTagger policy has no tagger");
          return mask_entities(corpus, *p.tagger, threads);
        }
      },
      policy);
}

double MaskStats::percent_rounded() const { return std::round(percent_masked * 1000.0) / 10.0; }

nlohmann::json MaskStats::to_json() const {
  return {{"masked", masked_tokens}, {"total", total_tokens}, {"percent", percent_rounded()}};
}

MaskStats mask_stats(const MaskedCorpus& masked) {
  MaskStats stats;
  stats.total_tokens = masked.token_count();
  if (stats.total_tokens == 0) throw std::invalid_argument("mask statistics need a non-empty corpus");
  stats.masked_tokens = masked.mask_count();
  stats.percent_masked =
      static_cast<double>(stats.masked_tokens) / static_cast<double>(stats.total_tokens);
  return stats;
}

}  // namespace maskfill
