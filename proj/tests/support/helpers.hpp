#pragma once

#include <string>
#include <vector>

#include "maskfill/corpus.hpp"
#include "maskfill/masked_corpus.hpp"

namespace maskfill::testing {

inline MaskedSentence ms(const std::string& text, std::size_t index = 0) {
  return MaskedSentence(split_tokens(text), index);
}

inline std::string joined(const Sentence& s) { return MaskedSentence(s.tokens).text(); }

inline std::vector<std::vector<std::string>> lines_of(const Corpus& c) {
  std::vector<std::vector<std::string>> out;
  for (const auto& s : c) out.push_back(s.tokens);
  return out;
}

inline std::vector<std::vector<std::string>> lines_of(const MaskedCorpus& c) {
  std::vector<std::vector<std::string>> out;
  for (const auto& s : c) out.push_back(s.tokens());
  return out;
}

}  // namespace maskfill::testing
