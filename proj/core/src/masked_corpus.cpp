#include "maskfill/masked_corpus.hpp"

#include <numeric>

namespace maskfill {

std::vector<MaskRun> find_mask_runs(const std::vector<Token>& tokens) {
  std::vector<MaskRun> runs;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!is_mask(tokens[i])) continue;
    if (!runs.empty() && runs.back().start + runs.back().length == i) {
      ++runs.back().length;
    } else {
      runs.push_back({i, 1});
    }
  }
  return runs;
}

MaskedSentence::MaskedSentence(std::vector<Token> tokens, std::size_t index)
    : MaskedSentence(std::move(tokens), index, 0) {
  original_len_ = tokens_.size();
}

MaskedSentence::MaskedSentence(std::vector<Token> tokens, std::size_t index,
                               std::size_t original_len)
    : tokens_(std::move(tokens)),
      index_(index),
      original_len_(original_len),
      runs_(find_mask_runs(tokens_)) {}

std::size_t MaskedSentence::mask_count() const noexcept {
  return std::accumulate(runs_.begin(), runs_.end(), std::size_t{0},
                         [](std::size_t acc, const MaskRun& r) { return acc + r.length; });
}

std::string MaskedSentence::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens_[i];
  }
  return out;
}

MaskedCorpus::MaskedCorpus(std::vector<MaskedSentence> sentences, std::string source_id)
    : sentences_(std::move(sentences)), source_id_(std::move(source_id)) {}

MaskedCorpus MaskedCorpus::from_corpus(const Corpus& corpus) {
  std::vector<MaskedSentence> sentences;
  sentences.reserve(corpus.size());
  for (const auto& s : corpus) sentences.emplace_back(s.tokens, s.index);
  return MaskedCorpus(std::move(sentences), corpus.source_id());
}

std::size_t MaskedCorpus::token_count() const noexcept {
  return std::accumulate(sentences_.begin(), sentences_.end(), std::size_t{0},
                         [](std::size_t acc, const MaskedSentence& s) { return acc + s.size(); });
}

std::size_t MaskedCorpus::mask_count() const noexcept {
  return std::accumulate(
      sentences_.begin(), sentences_.end(), std::size_t{0},
      [](std::size_t acc, const MaskedSentence& s) { return acc + s.mask_count(); });
}

Corpus MaskedCorpus::to_corpus() const {
  std::vector<Sentence> out;
  out.reserve(sentences_.size());
  for (const auto& s : sentences_) out.push_back({s.tokens(), s.index()});
  return Corpus(std::move(out), source_id_);
}

}  // namespace maskfill
