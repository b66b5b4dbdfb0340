#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "maskfill/corpus.hpp"

namespace maskfill {

struct FillCandidate {
  Token token;
  double score = 0.0;

  bool operator==(const FillCandidate&) const = default;
};

/// Ranking order: higher score first, then byte-lexicographically smaller token.
bool ranks_before(const FillCandidate& a, const FillCandidate& b);
void sort_candidates(std::vector<FillCandidate>& candidates);
bool is_ranked(const std::vector<FillCandidate>& candidates);

/// Anything that can propose tokens for a single masked position given its
/// bidirectional context. candidates() must be safe for concurrent callers;
/// finetune() returns a new filler and never mutates this one.
class MaskFiller {
 public:
  virtual ~MaskFiller() = default;

  /// At most k candidates, ranked, with finite positive scores, none equal to
  /// the mask marker.
  virtual std::vector<FillCandidate> candidates(std::span<const Token> left,
                                                std::span<const Token> right,
                                                std::size_t k) const = 0;

  virtual bool supports_finetune() const { return false; }

  /// Adapts a copy of this filler to `corpus`. The default throws
  /// std::logic_error.
  virtual std::shared_ptr<const MaskFiller> finetune(const Corpus& corpus) const;

  /// Identifies the model state; changes whenever finetune produces a new one.
  virtual std::string version() const = 0;
};

using FillerPtr = std::shared_ptr<const MaskFiller>;

}  // namespace maskfill
