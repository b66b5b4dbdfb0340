#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskfill/error.hpp"

namespace maskfill {

/// A whitespace-free, NFC-normalized word.
using Token = std::string;

/// The reserved marker that stands in for a masked token.
inline constexpr std::string_view kMaskToken = "[MASK]";

struct Sentence {
  std::vector<Token> tokens;
  std::size_t index = 0;

  bool operator==(const Sentence&) const = default;
};

struct LoadDiagnostics {
  std::size_t skipped_lines = 0;
  std::size_t sentences = 0;
  std::size_t tokens = 0;

  nlohmann::json to_json() const;
  bool operator==(const LoadDiagnostics&) const = default;
};

/// Whether a file may contain the mask marker.
enum class CorpusKind { kUnmasked, kMasked };

/// An ordered, immutable collection of sentences in file order.
class Corpus {
 public:
  Corpus() = default;
  /// Reindexes sentences 0..n-1 and derives the token count.
  Corpus(std::vector<Sentence> sentences, std::string source_id = {},
         LoadDiagnostics diagnostics = {});
  /// Convenience for literal corpora: each string is split on whitespace.
  static Corpus from_lines(const std::vector<std::string>& lines, std::string source_id = {});

  const std::vector<Sentence>& sentences() const noexcept { return sentences_; }
  std::size_t size() const noexcept { return sentences_.size(); }
  bool empty() const noexcept { return sentences_.empty(); }
  const Sentence& operator[](std::size_t i) const { return sentences_[i]; }
  auto begin() const noexcept { return sentences_.begin(); }
  auto end() const noexcept { return sentences_.end(); }

  const std::string& source_id() const noexcept { return source_id_; }
  std::size_t token_count() const noexcept { return token_count_; }
  const LoadDiagnostics& diagnostics() const noexcept { return diagnostics_; }

  /// Appends `other`'s sentences after this corpus' sentences.
  Corpus concat(const Corpus& other) const;

  /// Token-content equality; source id and diagnostics are ignored.
  bool same_tokens(const Corpus& other) const { return sentences_ == other.sentences_; }

 private:
  std::vector<Sentence> sentences_;
  std::string source_id_;
  std::size_t token_count_ = 0;
  LoadDiagnostics diagnostics_;
};

/// Splits on ASCII whitespace, dropping empty fields.
std::vector<Token> split_tokens(std::string_view line);

/// Parses corpus text. Lines are NFC-normalized; blank lines are skipped and
/// counted. Throws CorpusError on invalid UTF-8 or, for kUnmasked, on a
/// literal "[MASK]" token.
Corpus parse_corpus(std::string_view text, CorpusKind kind = CorpusKind::kUnmasked,
                    std::string source_id = {});

Corpus load_corpus(const std::filesystem::path& path, CorpusKind kind = CorpusKind::kUnmasked);

/// One sentence per line, tokens joined by a single space, LF endings.
std::string format_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Exact token multiset counts.
class FrequencyTable {
 public:
  FrequencyTable() = default;
  explicit FrequencyTable(std::map<Token, std::uint64_t> counts);

  const std::map<Token, std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }
  std::size_t distinct() const noexcept { return counts_.size(); }
  std::uint64_t count(std::string_view token) const;

  /// The `n` most frequent tokens; ties at equal count go to the
  /// byte-lexicographically smaller token.
  std::vector<Token> most_frequent(std::size_t n) const;

 private:
  std::map<Token, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

FrequencyTable build_frequency_table(const Corpus& corpus);

/// Reads a one-token-per-line list (allow lists, gazetteers). Blank lines are
/// ignored; entries are NFC-normalized.
std::vector<Token> load_token_list(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace maskfill
