#include "maskfill/entity_tagger.hpp"

#include "maskfill/masked_corpus.hpp"
#include "maskfill/unicode.hpp"

namespace maskfill {

GazetteerTagger::GazetteerTagger(const std::vector<Token>& gazetteer,
                                 bool capitalization_heuristic, bool case_fold)
    : capitalization_(capitalization_heuristic), case_fold_(case_fold) {
  for (const auto& entry : gazetteer) {
    gazetteer_.insert(case_fold_ ? unicode::fold_case(entry) : entry);
  }
}

std::vector<bool> GazetteerTagger::tag(const Sentence& sentence) const {
  std::vector<bool> flags(sentence.tokens.size(), false);
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    const Token& token = sentence.tokens[i];
    if (is_mask(token)) continue;
    const bool listed =
        gazetteer_.contains(case_fold_ ? unicode::fold_case(token) : token);
    const bool capitalized = capitalization_ && i > 0 && unicode::starts_uppercase(token);
    flags[i] = listed || capitalized;
  }
  return flags;
}

}  // namespace maskfill
