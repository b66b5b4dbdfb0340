#pragma once

#include <cstddef>
#include <vector>

#include "maskfill/corpus.hpp"

namespace maskfill {

/// A maximal span of consecutive mask markers.
struct MaskRun {
  std::size_t start = 0;
  std::size_t length = 0;

  bool operator==(const MaskRun&) const = default;
};

inline bool is_mask(std::string_view token) { return token == kMaskToken; }

/// A sentence in which some tokens have been replaced by the mask marker.
class MaskedSentence {
 public:
  MaskedSentence() = default;
  explicit MaskedSentence(std::vector<Token> tokens, std::size_t index = 0);
  MaskedSentence(std::vector<Token> tokens, std::size_t index, std::size_t original_len);

  const std::vector<Token>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t index() const noexcept { return index_; }
  /// Length of the sentence before any run merging.
  std::size_t original_len() const noexcept { return original_len_; }

  const std::vector<MaskRun>& mask_runs() const noexcept { return runs_; }
  std::size_t mask_count() const noexcept;
  bool has_masks() const noexcept { return !runs_.empty(); }

  /// Tokens joined by single spaces.
  std::string text() const;

  bool operator==(const MaskedSentence& other) const {
    return tokens_ == other.tokens_ && index_ == other.index_ &&
           original_len_ == other.original_len_;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t index_ = 0;
  std::size_t original_len_ = 0;
  std::vector<MaskRun> runs_;
};

std::vector<MaskRun> find_mask_runs(const std::vector<Token>& tokens);

class MaskedCorpus {
 public:
  MaskedCorpus() = default;
  explicit MaskedCorpus(std::vector<MaskedSentence> sentences, std::string source_id = {});
  /// Views a corpus loaded with CorpusKind::kMasked as a masked corpus.
  static MaskedCorpus from_corpus(const Corpus& corpus);

  const std::vector<MaskedSentence>& sentences() const noexcept { return sentences_; }
  std::size_t size() const noexcept { return sentences_.size(); }
  bool empty() const noexcept { return sentences_.empty(); }
  const MaskedSentence& operator[](std::size_t i) const { return sentences_[i]; }
  auto begin() const noexcept { return sentences_.begin(); }
  auto end() const noexcept { return sentences_.end(); }
  const std::string& source_id() const noexcept { return source_id_; }

  std::size_t token_count() const noexcept;
  std::size_t mask_count() const noexcept;

  /// Same sentences with markers kept as literal "[MASK]" tokens.
  Corpus to_corpus() const;

  bool operator==(const MaskedCorpus& other) const { return sentences_ == other.sentences_; }

 private:
  std::vector<MaskedSentence> sentences_;
  std::string source_id_;
};

}  // namespace maskfill
