#include "maskfill/trigram_lm.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "maskfill/error.hpp"
#include "maskfill/masked_corpus.hpp"
#include "maskfill/parallel.hpp"

namespace maskfill {
namespace {

constexpr std::string_view kSnapshotMagic = "maskfill-trigram-lm 1";
constexpr std::size_t kMaxSymbols = std::size_t{1} << 21;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw LmError("snapshot: bad number '" + std::string(text) + "'");
  }
  return value;
}

std::size_t parse_size(std::string_view text) {
  std::size_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw LmError("snapshot: bad integer '" + std::string(text) + "'");
  }
  return value;
}

void check_params(const LmParams& p) {
  for (double l : {p.lambda3, p.lambda2, p.lambda1}) {
    if (!(l > 0.0 && l < 1.0)) throw LmError("interpolation weights must lie in (0, 1)");
  }
  if (p.min_count == 0) throw LmError("min_count must be at least 1");
}

/// Line reader over snapshot text.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  std::string_view next() {
    if (pos_ >= text_.size()) throw LmError("snapshot: unexpected end of input");
    std::size_t eol = text_.find('\n', pos_);
    if (eol == std::string_view::npos) eol = text_.size();
    const auto line = text_.substr(pos_, eol - pos_);
    pos_ = eol + 1;
    return line;
  }

  std::vector<std::string_view> fields() {
    const auto line = next();
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i <= line.size()) {
      std::size_t j = line.find(' ', i);
      if (j == std::string_view::npos) j = line.size();
      out.push_back(line.substr(i, j - i));
      i = j + 1;
    }
    return out;
  }

  std::size_t counted(std::string_view keyword) {
    const auto f = fields();
    if (f.size() != 2 || f[0] != keyword) {
      throw LmError("snapshot: expected '" + std::string(keyword) + " <n>'");
    }
    return parse_size(f[1]);
  }

  bool done() const { return pos_ >= text_.size(); }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

bool is_technical_symbol(std::string_view token) {
  return token == kBos || token == kEos || token == kUnk;
}

std::string_view mode_name(TrainingMode mode) {
  switch (mode) {
    case TrainingMode::kOracle:
      return "oracle";
    case TrainingMode::kBaseline0:
      return "baseline0";
    case TrainingMode::kBaseline1:
      return "baseline1";
    case TrainingMode::kObfuscated:
      return "obfuscated";
  }
  return "unknown";
}

std::optional<TrainingMode> parse_mode(std::string_view name) {
  for (auto m : {TrainingMode::kOracle, TrainingMode::kBaseline0, TrainingMode::kBaseline1,
                 TrainingMode::kObfuscated}) {
    if (mode_name(m) == name) return m;
  }
  return std::nullopt;
}

NgramCounts count_ngrams(const Corpus& corpus, TrainingMode mode, std::size_t min_count) {
  if (corpus.empty()) throw LmError("cannot train a language model on an empty corpus");
  if (min_count == 0) throw LmError("min_count must be at least 1");

  std::map<Token, std::size_t> raw;
  bool saw_mask = false;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence.tokens) {
      if (is_mask(token)) {
        if (mode == TrainingMode::kOracle || mode == TrainingMode::kObfuscated) {
          throw LmError("sentence " + std::to_string(sentence.index) +
                        " contains the mask marker, which " + std::string(mode_name(mode)) +
                        " training forbids");
        }
        saw_mask = true;
        if (mode == TrainingMode::kBaseline1) continue;
      }
      if (!is_technical_symbol(token)) ++raw[token];
    }
  }

  NgramCounts counts;
  for (const auto& [token, n] : raw) {
    if (n >= min_count) counts.vocab.insert(token);
  }
  const bool mask_is_context_only = saw_mask && mode == TrainingMode::kBaseline1;
  if (mask_is_context_only) counts.context_only.insert(Token(kMaskToken));

  const Token bos(kBos), eos(kEos), unk(kUnk);
  auto map_token = [&](const Token& t) -> const Token& {
    if (mask_is_context_only && is_mask(t)) return t;
    return counts.vocab.contains(t) ? t : unk;
  };

  for (const auto& sentence : corpus) {
    const Token* u = &bos;
    const Token* v = &bos;
    for (std::size_t i = 0; i <= sentence.tokens.size(); ++i) {
      const Token& w = i < sentence.tokens.size() ? map_token(sentence.tokens[i]) : eos;
      if (!(mask_is_context_only && is_mask(w))) {
        counts.unigrams[w] += 1.0;
        counts.bigrams[{*v, w}] += 1.0;
        counts.trigrams[{*u, *v, w}] += 1.0;
      }
      u = v;
      v = &w;
    }
  }
  return counts;
}

TrigramLM::TrigramLM(NgramCounts counts, LmParams params, std::optional<TrainingMode> mode)
    : counts_(std::move(counts)), params_(params), mode_(mode) {
  check_params(params_);
  symbols_ = {Token(kBos), Token(kEos), Token(kUnk)};
  predictable_ = {false, true, true};
  for (const auto& t : counts_.vocab) {
    if (is_technical_symbol(t)) throw LmError("technical symbol '" + t + "' in vocabulary");
    symbols_.push_back(t);
    predictable_.push_back(true);
  }
  for (const auto& t : counts_.context_only) {
    if (counts_.vocab.contains(t) || is_technical_symbol(t)) {
      throw LmError("context-only symbol '" + t + "' is also predictable");
    }
    symbols_.push_back(t);
    predictable_.push_back(false);
  }
  if (symbols_.size() >= kMaxSymbols) throw LmError("vocabulary too large");
  for (Id i = 0; i < symbols_.size(); ++i) ids_.emplace(symbols_[i], i);
  predicted_size_ = counts_.vocab.size() + 2;

  auto strict_id = [&](const Token& t, bool must_predict) {
    const auto it = ids_.find(t);
    if (it == ids_.end()) throw LmError("n-gram uses unknown symbol '" + t + "'");
    if (must_predict && !predictable_[it->second]) {
      throw LmError("n-gram predicts context-only symbol '" + t + "'");
    }
    if (!must_predict && it->second == kEosId) throw LmError("</s> used as context");
    return it->second;
  };

  unigram_.assign(symbols_.size(), 0.0);
  for (const auto& [w, c] : counts_.unigrams) {
    unigram_[strict_id(w, true)] += c;
    unigram_total_ += c;
  }
  for (const auto& [k, c] : counts_.bigrams) {
    const Id v = strict_id(k.first, false);
    const Id w = strict_id(k.second, true);
    bigram_[key2(v, w)] += c;
    bigram_context_[v] += c;
  }
  for (const auto& [k, c] : counts_.trigrams) {
    const Id u = strict_id(std::get<0>(k), false);
    const Id v = strict_id(std::get<1>(k), false);
    const Id w = strict_id(std::get<2>(k), true);
    trigram_[key3(u, v, w)] += c;
    trigram_context_[key3(u, v, 0)] += c;
  }
  if (!(unigram_total_ > 0.0)) throw LmError("language model has no training events");
}

TrigramLM::Id TrigramLM::id_of(std::string_view token) const {
  const auto it = ids_.find(Token(token));
  return it == ids_.end() ? kUnkId : it->second;
}

std::vector<Token> TrigramLM::predicted_vocabulary() const {
  std::vector<Token> out;
  out.reserve(predicted_size_);
  for (Id i = 0; i < symbols_.size(); ++i) {
    if (predictable_[i]) out.push_back(symbols_[i]);
  }
  return out;
}

bool TrigramLM::in_vocabulary(std::string_view token) const {
  return counts_.vocab.contains(Token(token));
}

double TrigramLM::prob(Id w, Id u, Id v) const {
  if (!predictable_[w]) return 0.0;
  const double uniform = 1.0 / static_cast<double>(predicted_size_);
  const double f1 = unigram_[w] / unigram_total_;
  double p = params_.lambda1 * f1 + (1.0 - params_.lambda1) * uniform;

  if (const auto ctx = bigram_context_.find(v); ctx != bigram_context_.end()) {
    const auto hit = bigram_.find(key2(v, w));
    const double f2 = hit == bigram_.end() ? 0.0 : hit->second / ctx->second;
    p = params_.lambda2 * f2 + (1.0 - params_.lambda2) * p;
  }
  if (const auto ctx = trigram_context_.find(key3(u, v, 0)); ctx != trigram_context_.end()) {
    const auto hit = trigram_.find(key3(u, v, w));
    const double f3 = hit == trigram_.end() ? 0.0 : hit->second / ctx->second;
    p = params_.lambda3 * f3 + (1.0 - params_.lambda3) * p;
  }
  return p;
}

double TrigramLM::prob(std::string_view w, std::string_view u, std::string_view v) const {
  return prob(id_of(w), id_of(u), id_of(v));
}

std::string TrigramLM::snapshot() const {
  std::string out;
  out += kSnapshotMagic;
  out += "\nlambda " + format_double(params_.lambda3) + ' ' + format_double(params_.lambda2) +
         ' ' + format_double(params_.lambda1) + '\n';
  out += "min_count " + std::to_string(params_.min_count) + '\n';
  out += "vocab " + std::to_string(counts_.vocab.size()) + '\n';
  for (const auto& t : counts_.vocab) out += t + '\n';
  out += "context_only " + std::to_string(counts_.context_only.size()) + '\n';
  for (const auto& t : counts_.context_only) out += t + '\n';
  out += "ngrams " +
         std::to_string(counts_.unigrams.size() + counts_.bigrams.size() +
                        counts_.trigrams.size()) +
         '\n';
  for (const auto& [w, c] : counts_.unigrams) out += "1 " + w + ' ' + format_double(c) + '\n';
  for (const auto& [k, c] : counts_.bigrams) {
    out += "2 " + k.first + ' ' + k.second + ' ' + format_double(c) + '\n';
  }
  for (const auto& [k, c] : counts_.trigrams) {
    out += "3 " + std::get<0>(k) + ' ' + std::get<1>(k) + ' ' + std::get<2>(k) + ' ' +
           format_double(c) + '\n';
  }
  return out;
}

TrigramLM TrigramLM::from_snapshot(std::string_view text) {
  LineReader in(text);
  if (in.next() != kSnapshotMagic) throw LmError("snapshot: missing header");

  LmParams params;
  const auto lambda = in.fields();
  if (lambda.size() != 4 || lambda[0] != "lambda") throw LmError("snapshot: expected lambdas");
  params.lambda3 = parse_double(lambda[1]);
  params.lambda2 = parse_double(lambda[2]);
  params.lambda1 = parse_double(lambda[3]);
  params.min_count = in.counted("min_count");

  NgramCounts counts;
  for (std::size_t n = in.counted("vocab"); n > 0; --n) counts.vocab.emplace(in.next());
  for (std::size_t n = in.counted("context_only"); n > 0; --n) {
    counts.context_only.emplace(in.next());
  }
  for (std::size_t n = in.counted("ngrams"); n > 0; --n) {
    const auto f = in.fields();
    if (f.size() < 3) throw LmError("snapshot: malformed n-gram record");
    const auto level = parse_size(f[0]);
    if (f.size() != level + 2) throw LmError("snapshot: n-gram record has wrong arity");
    const double c = parse_double(f.back());
    if (level == 1) {
      counts.unigrams[Token(f[1])] = c;
    } else if (level == 2) {
      counts.bigrams[{Token(f[1]), Token(f[2])}] = c;
    } else if (level == 3) {
      counts.trigrams[{Token(f[1]), Token(f[2]), Token(f[3])}] = c;
    } else {
      throw LmError("snapshot: unsupported n-gram level");
    }
  }
  if (!in.done()) throw LmError("snapshot: trailing data");
  return TrigramLM(std::move(counts), params);
}

void TrigramLM::save(const std::filesystem::path& path) const { write_file(path, snapshot()); }

TrigramLM TrigramLM::load(const std::filesystem::path& path) {
  return from_snapshot(read_file(path));
}

TrigramLM train_lm(const Corpus& corpus, TrainingMode mode, const LmParams& params) {
  check_params(params);
  return TrigramLM(count_ngrams(corpus, mode, params.min_count), params, mode);
}

NgramCounts mix_counts(const NgramCounts& a, double weight_a, const NgramCounts& b,
                       double weight_b) {
  NgramCounts out;
  auto add = [](auto& dst, const auto& src, double weight) {
    if (weight == 0.0) return;
    for (const auto& [k, c] : src) dst[k] += weight * c;
  };
  add(out.unigrams, a.unigrams, weight_a);
  add(out.unigrams, b.unigrams, weight_b);
  add(out.bigrams, a.bigrams, weight_a);
  add(out.bigrams, b.bigrams, weight_b);
  add(out.trigrams, a.trigrams, weight_a);
  add(out.trigrams, b.trigrams, weight_b);
  if (weight_a != 0.0) {
    out.vocab.insert(a.vocab.begin(), a.vocab.end());
    out.context_only.insert(a.context_only.begin(), a.context_only.end());
  }
  if (weight_b != 0.0) {
    out.vocab.insert(b.vocab.begin(), b.vocab.end());
    out.context_only.insert(b.context_only.begin(), b.context_only.end());
  }
  for (const auto& t : out.vocab) out.context_only.erase(t);
  return out;
}

TrigramLM adapt_lm(const TrigramLM& background, const Corpus& in_domain, double alpha,
                   TrainingMode mode) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw LmError("adaptation weight must lie in [0, 1]");
  const NgramCounts in_counts = count_ngrams(in_domain, mode, background.params().min_count);
  NgramCounts mixed = mix_counts(in_counts, alpha, background.counts(), 1.0 - alpha);
  // The adapted model must cover the in-domain vocabulary even at alpha == 0.
  mixed.vocab.insert(in_counts.vocab.begin(), in_counts.vocab.end());
  for (const auto& t : in_counts.context_only) {
    if (!mixed.vocab.contains(t)) mixed.context_only.insert(t);
  }
  for (const auto& t : mixed.vocab) mixed.context_only.erase(t);
  return TrigramLM(std::move(mixed), background.params(), mode);
}

double sentence_log_prob(const TrigramLM& lm, const Sentence& sentence, std::size_t* oov_count) {
  using Id = TrigramLM::Id;
  Id u = TrigramLM::kBosId;
  Id v = TrigramLM::kBosId;
  double total = 0.0;
  std::size_t oov = 0;
  for (std::size_t i = 0; i <= sentence.tokens.size(); ++i) {
    Id w = TrigramLM::kEosId;
    if (i < sentence.tokens.size()) {
      const auto& token = sentence.tokens[i];
      w = lm.in_vocabulary(token) ? lm.id_of(token) : TrigramLM::kUnkId;
      if (w == TrigramLM::kUnkId) ++oov;
    }
    total += std::log(lm.prob(w, u, v));
    u = v;
    v = w;
  }
  if (oov_count) *oov_count = oov;
  return total;
}

nlohmann::json PerplexityReport::to_json() const {
  return {{"ppl", perplexity}, {"tokens", token_count}, {"oov_rate", oov_rate}};
}

PerplexityReport perplexity(const TrigramLM& lm, const Corpus& test, unsigned threads) {
  if (test.empty()) throw LmError("perplexity needs a non-empty test set");
  for (const auto& s : test) {
    for (const auto& t : s.tokens) {
      if (is_mask(t)) {
        throw LmError("test sentence " + std::to_string(s.index) + " contains the mask marker");
      }
    }
  }
  std::vector<double> log_probs(test.size());
  std::vector<std::size_t> oovs(test.size());
  parallel_for(test.size(), threads,
               [&](std::size_t i) { log_probs[i] = sentence_log_prob(lm, test[i], &oovs[i]); });

  PerplexityReport report;
  std::size_t oov = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    report.log_prob += log_probs[i];
    oov += oovs[i];
    report.token_count += test[i].tokens.size() + 1;
  }
  const auto t = static_cast<double>(report.token_count);
  report.perplexity = std::exp(-report.log_prob / t);
  report.oov_rate = static_cast<double>(oov) / t;
  return report;
}

}  // namespace maskfill
