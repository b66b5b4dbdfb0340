#include "maskfill/obfuscation.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "maskfill/parallel.hpp"

namespace maskfill {
namespace {

void validate(const TopK& params) {
  if (params.k == 0) throw std::invalid_argument("Top-K requires k >= 1");
}

/// Shared left-to-right fill loop; `choose` picks from the ranked candidates.
template <class Choose>
Sentence fill_sequential(const MaskedSentence& sentence, const MaskFiller& filler, std::size_t k,
                         Choose&& choose) {
  const auto& in = sentence.tokens();
  std::vector<Token> out;
  out.reserve(in.size());
  for (std::size_t pos = 0; pos < in.size(); ++pos) {
    if (!is_mask(in[pos])) {
      out.push_back(in[pos]);
      continue;
    }
    const std::span<const Token> left(out);
    const std::span<const Token> right(in.data() + pos + 1, in.size() - pos - 1);
    auto ranked = filler.candidates(left, right, k);
    std::erase_if(ranked, [](const FillCandidate& c) { return c.token.empty() || is_mask(c.token); });
    if (ranked.empty()) {
      throw FillError("filler returned no candidates", sentence.index(), pos);
    }
    out.push_back(choose(ranked).token);
  }
  return Sentence{std::move(out), sentence.index()};
}

Sentence fill_one(const MaskedSentence& sentence, const InnerStrategy& strategy,
                  const MaskFiller& filler, const RandomSource& rng) {
  if (std::holds_alternative<Top1>(strategy)) return fill_top1(sentence, filler);
  return fill_topk(sentence, filler, std::get<TopK>(strategy), rng);
}

Corpus fill_corpus(const MaskedCorpus& masked, const InnerStrategy& strategy,
                   const MaskFiller& filler, const RandomSource& rng, unsigned threads) {
  std::vector<Sentence> out(masked.size());
  std::vector<std::optional<FillFailure>> failures(masked.size());
  parallel_for(masked.size(), threads, [&](std::size_t i) {
    const MaskedSentence merged = merge_consecutive_masks(masked[i]);
    try {
      out[i] = fill_one(merged, strategy, filler, rng);
    } catch (const FillError& e) {
      failures[i] = FillFailure{e.sentence_index(), e.mask_position(), e.what()};
    }
  });

  std::vector<FillFailure> collected;
  for (auto& f : failures) {
    if (f) collected.push_back(std::move(*f));
  }
  if (!collected.empty()) throw ObfuscationError(std::move(collected));
  return Corpus(std::move(out), masked.source_id());
}

}  // namespace

FillError::FillError(const std::string& what, std::size_t sentence_index, std::size_t mask_position)
    : Error("sentence " + std::to_string(sentence_index) + ", position " +
            std::to_string(mask_position) + ": " + what),
      sentence_index_(sentence_index),
      mask_position_(mask_position) {}

ObfuscationError::ObfuscationError(std::vector<FillFailure> failures)
    : Error(std::to_string(failures.size()) + " sentence(s) could not be filled" +
            (failures.empty() ? std::string() : "; first: " + failures.front().message)),
      failures_(std::move(failures)) {}

FinetuneError::FinetuneError(const std::string& what, std::size_t round)
    : Error("fine-tune round " + std::to_string(round) + " failed: " + what), round_(round) {}

MaskedSentence merge_consecutive_masks(const MaskedSentence& sentence) {
  std::vector<Token> merged;
  merged.reserve(sentence.size());
  for (const auto& token : sentence.tokens()) {
    if (is_mask(token) && !merged.empty() && is_mask(merged.back())) continue;
    merged.push_back(token);
  }
  return MaskedSentence(std::move(merged), sentence.index(), sentence.original_len());
}

Sentence fill_top1(const MaskedSentence& sentence, const MaskFiller& filler) {
  return fill_sequential(sentence, filler, 1,
                         [](const std::vector<FillCandidate>& ranked) -> const FillCandidate& {
                           return ranked.front();
                         });
}

const FillCandidate& draw_candidate(const std::vector<FillCandidate>& ranked, const TopK& params,
                                    Rng& rng) {
  if (ranked.empty()) throw std::invalid_argument("draw_candidate on an empty list");
  const std::size_t n = std::min(ranked.size(), params.k);
  std::vector<std::size_t> remaining(n);
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});

  while (!remaining.empty()) {
    std::size_t slot = 0;
    if (params.weighted) {
      double total = 0.0;
      for (auto idx : remaining) total += ranked[idx].score;
      double target = uniform_unit(rng) * total;
      slot = remaining.size() - 1;
      for (std::size_t j = 0; j < remaining.size(); ++j) {
        target -= ranked[remaining[j]].score;
        if (target < 0.0) {
          slot = j;
          break;
        }
      }
    } else {
      slot = static_cast<std::size_t>(uniform_index(rng, remaining.size()));
    }
    const FillCandidate& pick = ranked[remaining[slot]];
    if (!params.forbidden || !params.forbidden->contains(pick.token)) return pick;
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(slot));
  }
  return ranked.front();
}

Sentence fill_topk(const MaskedSentence& sentence, const MaskFiller& filler, const TopK& params,
                   const RandomSource& rng) {
  validate(params);
  Rng stream = rng.stream(sentence.index());
  return fill_sequential(sentence, filler, params.k,
                         [&](const std::vector<FillCandidate>& ranked) -> const FillCandidate& {
                           return draw_candidate(ranked, params, stream);
                         });
}

Corpus obfuscate_corpus(const MaskedCorpus& masked, const FillStrategy& strategy,
                        const FillerPtr& filler, const RandomSource& rng,
                        const ObfuscateOptions& options) {
  if (!filler) throw std::invalid_argument("obfuscate_corpus requires a filler");
  if (const auto* ft = std::get_if<FineTune>(&strategy)) {
    return finetune_loop(masked, filler, ft->inner, ft->rounds, rng, ft->tau, options).corpus;
  }
  if (const auto* topk = std::get_if<TopK>(&strategy)) {
    validate(*topk);
    return fill_corpus(masked, *topk, *filler, rng, options.threads);
  }
  return fill_corpus(masked, Top1{}, *filler, rng, options.threads);
}

FinetuneResult finetune_loop(const MaskedCorpus& masked, const FillerPtr& filler,
                             const InnerStrategy& inner, std::size_t rounds,
                             const RandomSource& rng, double tau,
                             const ObfuscateOptions& options) {
  if (!filler) throw std::invalid_argument("finetune_loop requires a filler");
  if (!filler->supports_finetune()) {
    throw std::invalid_argument("finetune_loop requires a filler that supports fine-tuning");
  }
  if (rounds == 0) throw std::invalid_argument("fine-tuning requires rounds >= 1");
  if (const auto* topk = std::get_if<TopK>(&inner)) validate(*topk);

  std::vector<Sentence> clean;
  for (const auto& s : masked) {
    if (!s.has_masks()) clean.push_back({s.tokens(), s.index()});
  }
  const double clean_fraction =
      masked.empty() ? 0.0 : static_cast<double>(clean.size()) / static_cast<double>(masked.size());

  FinetuneResult result;
  result.tuned_on_clean_first = !clean.empty() && clean_fraction >= tau;

  FillerPtr current = filler;
  for (std::size_t round = 1; round <= rounds; ++round) {
    const Corpus tune_data = (round == 1 && result.tuned_on_clean_first)
                                 ? Corpus(clean, masked.source_id())
                                 : fill_corpus(masked, inner, *current, rng, options.threads);
    try {
      current = current->finetune(tune_data);
    } catch (const std::exception& e) {
      throw FinetuneError(e.what(), round);
    }
    if (!current) throw FinetuneError("fine-tune produced no filler", round);
  }
  result.corpus = fill_corpus(masked, inner, *current, rng, options.threads);
  result.filler = std::move(current);
  return result;
}

std::string strategy_name(const FillStrategy& strategy) {
  if (std::holds_alternative<Top1>(strategy)) return "top1";
  if (std::holds_alternative<TopK>(strategy)) return "topk";
  const auto& ft = std::get<FineTune>(strategy);
  return std::holds_alternative<Top1>(ft.inner) ? "top1_ft" : "topk_ft";
}

}  // namespace maskfill
