#include "maskfill/stat_filler.hpp"

#include <algorithm>
#include <charconv>

#include "maskfill/error.hpp"
#include "maskfill/masked_corpus.hpp"

namespace maskfill {
namespace {

constexpr std::string_view kFillerMagic = "maskfill-stat-filler 1";

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace

StatFiller::StatFiller(TrigramLM lm, double mu, std::uint64_t version)
    : lm_(std::move(lm)), mu_(mu), version_(version) {
  if (!(mu_ >= 0.0)) throw LmError("fine-tune weight mu must be non-negative");
  for (const auto& token : lm_.counts().vocab) {
    if (is_mask(token) || is_technical_symbol(token)) continue;
    pool_.push_back(token);
    pool_ids_.push_back(lm_.id_of(token));
  }
  if (pool_.empty()) throw LmError("stat filler has an empty candidate pool");
}

std::shared_ptr<const StatFiller> StatFiller::train(const Corpus& background,
                                                    const StatFillerParams& params) {
  return std::make_shared<const StatFiller>(
      train_lm(background, TrainingMode::kOracle, params.lm), params.mu, 0);
}

TrigramLM::Id StatFiller::context_id(std::string_view token) const {
  return lm_.in_vocabulary(token) ? lm_.id_of(token) : TrigramLM::kUnkId;
}

std::vector<FillCandidate> StatFiller::candidates(std::span<const Token> left,
                                                  std::span<const Token> right,
                                                  std::size_t k) const {
  if (k == 0) return {};
  const auto l1 = left.size() >= 1 ? context_id(left[left.size() - 1]) : TrigramLM::kBosId;
  const auto l2 = left.size() >= 2 ? context_id(left[left.size() - 2]) : TrigramLM::kBosId;
  const auto r1 = right.empty() ? TrigramLM::kEosId : context_id(right.front());

  std::vector<FillCandidate> scored;
  scored.reserve(pool_.size());
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    const auto w = pool_ids_[i];
    scored.push_back({pool_[i], lm_.prob(w, l2, l1) * lm_.prob(r1, l1, w)});
  }
  const std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), ranks_before);
  scored.resize(keep);
  return scored;
}

double StatFiller::score(std::string_view candidate, std::span<const Token> left,
                         std::span<const Token> right) const {
  const auto l1 = left.size() >= 1 ? context_id(left[left.size() - 1]) : TrigramLM::kBosId;
  const auto l2 = left.size() >= 2 ? context_id(left[left.size() - 2]) : TrigramLM::kBosId;
  const auto r1 = right.empty() ? TrigramLM::kEosId : context_id(right.front());
  const auto w = context_id(candidate);
  return lm_.prob(w, l2, l1) * lm_.prob(r1, l1, w);
}

FillerPtr StatFiller::finetune(const Corpus& corpus) const { return finetuned(corpus); }

std::shared_ptr<const StatFiller> StatFiller::finetuned(const Corpus& corpus) const {
  if (corpus.empty()) throw LmError("cannot fine-tune on an empty corpus");
  if (mu_ == 0.0) return std::make_shared<const StatFiller>(lm_, mu_, version_ + 1);
  const NgramCounts in_domain =
      count_ngrams(corpus, TrainingMode::kObfuscated, lm_.params().min_count);
  TrigramLM tuned(mix_counts(lm_.counts(), 1.0, in_domain, mu_), lm_.params(),
                  TrainingMode::kObfuscated);
  return std::make_shared<const StatFiller>(std::move(tuned), mu_, version_ + 1);
}

std::string StatFiller::snapshot() const {
  return std::string(kFillerMagic) + "\nversion " + std::to_string(version_) + "\nmu " +
         format_double(mu_) + '\n' + lm_.snapshot();
}

std::shared_ptr<const StatFiller> StatFiller::from_snapshot(std::string_view text) {
  auto take_line = [&text]() {
    const auto eol = text.find('\n');
    if (eol == std::string_view::npos) throw LmError("filler snapshot: truncated header");
    const auto line = text.substr(0, eol);
    text.remove_prefix(eol + 1);
    return line;
  };
  if (take_line() != kFillerMagic) throw LmError("filler snapshot: missing header");

  auto value_of = [](std::string_view line, std::string_view key) {
    if (line.substr(0, key.size() + 1) != std::string(key) + ' ') {
      throw LmError("filler snapshot: expected '" + std::string(key) + "'");
    }
    return line.substr(key.size() + 1);
  };
  const auto version_text = value_of(take_line(), "version");
  const auto mu_text = value_of(take_line(), "mu");

  std::uint64_t version = 0;
  double mu = 0.0;
  auto r1 = std::from_chars(version_text.data(), version_text.data() + version_text.size(), version);
  auto r2 = std::from_chars(mu_text.data(), mu_text.data() + mu_text.size(), mu);
  if (r1.ec != std::errc() || r2.ec != std::errc()) {
    throw LmError("filler snapshot: malformed header values");
  }
  return std::make_shared<const StatFiller>(TrigramLM::from_snapshot(text), mu, version);
}

void StatFiller::save(const std::filesystem::path& path) const { write_file(path, snapshot()); }

std::shared_ptr<const StatFiller> StatFiller::load(const std::filesystem::path& path) {
  return from_snapshot(read_file(path));
}

}  // namespace maskfill
