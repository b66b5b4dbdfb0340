#include "maskfill/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "maskfill/error.hpp"
#include "maskfill/unicode.hpp"

namespace maskfill {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::size_t count_tokens(const std::vector<Sentence>& sentences) {
  return std::accumulate(sentences.begin(), sentences.end(), std::size_t{0},
                         [](std::size_t acc, const Sentence& s) { return acc + s.tokens.size(); });
}

}  // namespace

nlohmann::json LoadDiagnostics::to_json() const {
  return {{"skipped_lines", skipped_lines}, {"sentences", sentences}, {"tokens", tokens}};
}

Corpus::Corpus(std::vector<Sentence> sentences, std::string source_id, LoadDiagnostics diagnostics)
    : sentences_(std::move(sentences)),
      source_id_(std::move(source_id)),
      diagnostics_(diagnostics) {
  for (std::size_t i = 0; i < sentences_.size(); ++i) sentences_[i].index = i;
  token_count_ = count_tokens(sentences_);
  diagnostics_.sentences = sentences_.size();
  diagnostics_.tokens = token_count_;
}

Corpus Corpus::from_lines(const std::vector<std::string>& lines, std::string source_id) {
  std::vector<Sentence> sentences;
  sentences.reserve(lines.size());
  for (const auto& line : lines) {
    auto tokens = split_tokens(line);
    if (!tokens.empty()) sentences.push_back({std::move(tokens), 0});
  }
  return Corpus(std::move(sentences), std::move(source_id));
}

Corpus Corpus::concat(const Corpus& other) const {
  std::vector<Sentence> joined = sentences_;
  joined.insert(joined.end(), other.sentences_.begin(), other.sentences_.end());
  return Corpus(std::move(joined), source_id_);
}

std::vector<Token> split_tokens(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.emplace_back(line.substr(start, i - start));
  }
  return tokens;
}

Corpus parse_corpus(std::string_view text, CorpusKind kind, std::string source_id) {
  std::vector<Sentence> sentences;
  LoadDiagnostics diagnostics;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    if (unicode::find_invalid_utf8(raw)) {
      throw CorpusError("invalid UTF-8 in " + (source_id.empty() ? "corpus" : source_id), line_no);
    }
    const std::string line = unicode::nfc(raw);
    auto tokens = split_tokens(line);
    if (tokens.empty()) {
      ++diagnostics.skipped_lines;
      continue;
    }
    if (kind == CorpusKind::kUnmasked &&
        std::find(tokens.begin(), tokens.end(), kMaskToken) != tokens.end()) {
      throw CorpusError("mask marker found in unmasked corpus; file is already masked", line_no);
    }
    sentences.push_back({std::move(tokens), 0});
  }
  Corpus corpus(std::move(sentences), std::move(source_id), diagnostics);
  return corpus;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw CorpusError("read failure on " + path.string());
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CorpusError("cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw CorpusError("write failure on " + path.string());
}

Corpus load_corpus(const std::filesystem::path& path, CorpusKind kind) {
  return parse_corpus(read_file(path), kind, path.string());
}

std::string format_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& sentence : corpus) {
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      if (i > 0) out.push_back(' ');
      out += sentence.tokens[i];
    }
    out.push_back('\n');
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  write_file(path, format_corpus(corpus));
}

FrequencyTable::FrequencyTable(std::map<Token, std::uint64_t> counts) : counts_(std::move(counts)) {
  for (auto it = counts_.begin(); it != counts_.end();) {
    if (it->second == 0) {
      it = counts_.erase(it);
    } else {
      total_ += it->second;
      ++it;
    }
  }
}

std::uint64_t FrequencyTable::count(std::string_view token) const {
  const auto it = counts_.find(Token(token));
  return it == counts_.end() ? 0 : it->second;
}

std::vector<Token> FrequencyTable::most_frequent(std::size_t n) const {
  std::vector<std::pair<Token, std::uint64_t>> entries(counts_.begin(), counts_.end());
  const std::size_t keep = std::min(n, entries.size());
  // counts_ is already in byte order, so a stable sort on count keeps the tie rule.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<Token> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(entries[i].first);
  return out;
}

FrequencyTable build_frequency_table(const Corpus& corpus) {
  std::map<Token, std::uint64_t> counts;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence.tokens) ++counts[token];
  }
  return FrequencyTable(std::move(counts));
}

std::vector<Token> load_token_list(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<Token> tokens;
  std::size_t line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (unicode::find_invalid_utf8(line)) throw CorpusError("invalid UTF-8 in " + path.string(), line_no);
    auto fields = split_tokens(unicode::nfc(line));
    if (fields.empty()) continue;
    if (fields.size() > 1) {
      throw CorpusError("expected one token per line in " + path.string(), line_no);
    }
    tokens.push_back(std::move(fields.front()));
  }
  return tokens;
}

}  // namespace maskfill
