#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "maskfill/corpus.hpp"

namespace maskfill {

/// Flags tokens of a sentence as named entities. Implementations must return
/// exactly one flag per token and be safe to call concurrently.
class EntityTagger {
 public:
  virtual ~EntityTagger() = default;
  virtual std::vector<bool> tag(const Sentence& sentence) const = 0;
};

/// Hermetic tagger: a token is an entity if it is in the gazetteer, or, with
/// the capitalization heuristic on, if it is not sentence-initial and starts
/// with an uppercase letter.
class GazetteerTagger final : public EntityTagger {
 public:
  GazetteerTagger(const std::vector<Token>& gazetteer, bool capitalization_heuristic,
                  bool case_fold = false);

  std::vector<bool> tag(const Sentence& sentence) const override;

  bool capitalization_heuristic() const noexcept { return capitalization_; }

 private:
  std::unordered_set<Token> gazetteer_;
  bool capitalization_;
  bool case_fold_;
};

}  // namespace maskfill
