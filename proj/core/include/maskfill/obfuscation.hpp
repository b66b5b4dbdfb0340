#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "maskfill/corpus.hpp"
#include "maskfill/error.hpp"
#include "maskfill/mask_filler.hpp"
#include "maskfill/masked_corpus.hpp"
#include "maskfill/masking.hpp"
#include "maskfill/random.hpp"

namespace maskfill {

/// Replace each marker with the filler's best candidate.
struct Top1 {};

/// Replace each marker with a random draw from the filler's top-k. Draws are
/// uniform (or score-weighted) without replacement; candidates in
/// `forbidden` are rejected until one passes or the list is exhausted, in
/// which case the overall best candidate is used.
struct TopK {
  std::size_t k = 10;
  std::optional<TokenSet> forbidden;
  bool weighted = false;
};

using InnerStrategy = std::variant<Top1, TopK>;

/// Alternate fill and fine-tune for `rounds` rounds, then fill with the last
/// fine-tuned filler. If at least `tau` of the sentences carry no marker, the
/// first round tunes on those clean sentences instead of a fill.
struct FineTune {
  std::size_t rounds = 1;
  InnerStrategy inner = TopK{};
  double tau = 0.5;
};

using FillStrategy = std::variant<Top1, TopK, FineTune>;

/// No candidate was available for a marker.
class FillError : public Error {
 public:
  FillError(const std::string& what, std::size_t sentence_index, std::size_t mask_position);

  std::size_t sentence_index() const noexcept { return sentence_index_; }
  std::size_t mask_position() const noexcept { return mask_position_; }

 private:
  std::size_t sentence_index_;
  std::size_t mask_position_;
};

struct FillFailure {
  std::size_t sentence_index = 0;
  std::size_t mask_position = 0;
  std::string message;
};

/// Every FillError of a corpus run, ordered by sentence index.
class ObfuscationError : public Error {
 public:
  explicit ObfuscationError(std::vector<FillFailure> failures);
  const std::vector<FillFailure>& failures() const noexcept { return failures_; }

 private:
  std::vector<FillFailure> failures_;
};

class FinetuneError : public Error {
 public:
  FinetuneError(const std::string& what, std::size_t round);
  /// 1-based.
  std::size_t round() const noexcept { return round_; }

 private:
  std::size_t round_;
};

/// Collapses every maximal run of markers to a single marker.
MaskedSentence merge_consecutive_masks(const MaskedSentence& sentence);

/// Fills markers left to right; each filled token becomes left context for
/// the next marker.
Sentence fill_top1(const MaskedSentence& sentence, const MaskFiller& filler);

/// As fill_top1 but drawing from the top-k using the sentence's own stream
/// `rng.stream(sentence.index())`.
Sentence fill_topk(const MaskedSentence& sentence, const MaskFiller& filler, const TopK& params,
                   const RandomSource& rng);

/// Chooses among ranked candidates per the TopK rules. Exposed for testing.
const FillCandidate& draw_candidate(const std::vector<FillCandidate>& ranked, const TopK& params,
                                    Rng& rng);

struct ObfuscateOptions {
  unsigned threads = 1;
};

/// Merges and fills every sentence. FineTune strategies run finetune_loop
/// and return its final corpus. Throws ObfuscationError listing every
/// sentence that could not be filled.
Corpus obfuscate_corpus(const MaskedCorpus& masked, const FillStrategy& strategy,
                        const FillerPtr& filler, const RandomSource& rng,
                        const ObfuscateOptions& options = {});

struct FinetuneResult {
  Corpus corpus;
  FillerPtr filler;
  /// True when round 1 tuned on mask-free sentences only.
  bool tuned_on_clean_first = false;
};

FinetuneResult finetune_loop(const MaskedCorpus& masked, const FillerPtr& filler,
                             const InnerStrategy& inner, std::size_t rounds,
                             const RandomSource& rng, double tau = 0.5,
                             const ObfuscateOptions& options = {});

std::string strategy_name(const FillStrategy& strategy);

}  // namespace maskfill
