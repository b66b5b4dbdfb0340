#include "maskfill/prompts.hpp"

#include <stdexcept>

#include "maskfill/obfuscation.hpp"

namespace maskfill {

nlohmann::json Prompt::to_json() const {
  nlohmann::json j = {{"instruction", instruction}, {"input", input}};
  if (output) j["output"] = *output;
  return j;
}

std::vector<Prompt> build_inference_prompts(const MaskedCorpus& masked) {
  std::vector<Prompt> prompts;
  prompts.reserve(masked.size());
  for (const auto& sentence : masked) {
    Prompt p;
    p.input = merge_consecutive_masks(sentence).text();
    prompts.push_back(std::move(p));
  }
  return prompts;
}

std::vector<Prompt> build_finetune_prompts(const Corpus& reference, double mask_rate,
                                           const RandomSource& rng) {
  if (!(mask_rate >= 0.0 && mask_rate <= 1.0)) {
    throw std::invalid_argument("mask rate must lie in [0, 1]");
  }
  std::vector<Prompt> prompts;
  prompts.reserve(reference.size());
  for (const auto& sentence : reference) {
    Rng stream = rng.stream(sentence.index);
    std::vector<Token> masked;
    masked.reserve(sentence.tokens.size());
    for (const auto& token : sentence.tokens) {
      masked.push_back(bernoulli(stream, mask_rate) ? Token(kMaskToken) : token);
    }
    Prompt p;
    p.input = MaskedSentence(std::move(masked), sentence.index).text();
    p.output = MaskedSentence(sentence.tokens, sentence.index).text();
    prompts.push_back(std::move(p));
  }
  return prompts;
}

Sentence parse_generation(std::string_view generated, const MaskedSentence& sentence) {
  const std::vector<Token> gen = split_tokens(generated);
  const auto& tokens = sentence.tokens();

  std::vector<std::size_t> anchor_pos;  // positions of unmasked tokens in `sentence`
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!is_mask(tokens[i])) anchor_pos.push_back(i);
  }
  const std::size_t a = anchor_pos.size();
  const std::size_t g = gen.size();

  // suffix[i][j] = LCS length of anchors[i..] and gen[j..].
  std::vector<std::vector<std::size_t>> suffix(a + 1, std::vector<std::size_t>(g + 1, 0));
  for (std::size_t i = a; i-- > 0;) {
    for (std::size_t j = g; j-- > 0;) {
      suffix[i][j] = tokens[anchor_pos[i]] == gen[j]
                         ? suffix[i + 1][j + 1] + 1
                         : std::max(suffix[i + 1][j], suffix[i][j + 1]);
    }
  }
  if (suffix[0][0] < a) {
    throw ParseMisaligned("generation leaves " + std::to_string(a - suffix[0][0]) +
                          " context token(s) unmatched in sentence " +
                          std::to_string(sentence.index()));
  }

  // Every anchor matches, so take the earliest match compatible with a full alignment.
  std::vector<std::size_t> match(a);
  for (std::size_t i = 0, j = 0; i < a; ++i) {
    while (!(tokens[anchor_pos[i]] == gen[j] && suffix[i + 1][j + 1] == a - i - 1)) ++j;
    match[i] = j++;
  }

  std::vector<Token> out;
  out.reserve(tokens.size());
  std::size_t next_anchor = 0;
  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    if (!is_mask(tokens[pos])) {
      out.push_back(tokens[pos]);
      ++next_anchor;
      continue;
    }
    const std::size_t gap_begin = next_anchor == 0 ? 0 : match[next_anchor - 1] + 1;
    const std::size_t gap_end = next_anchor < a ? match[next_anchor] : g;
    std::size_t pick = gap_begin;
    if (gap_begin >= gap_end) {
      throw ParseMisaligned("no generated token for the marker at position " +
                            std::to_string(pos) + " in sentence " +
                            std::to_string(sentence.index()));
    }
    // A sentence-initial marker has no left anchor; use the token before the right one.
    if (next_anchor == 0 && a > 0) pick = gap_end - 1;
    if (is_mask(gen[pick])) {
      throw ParseMisaligned("generation left the marker at position " + std::to_string(pos) +
                            " unfilled in sentence " + std::to_string(sentence.index()));
    }
    out.push_back(gen[pick]);
  }
  return Sentence{std::move(out), sentence.index()};
}

}  // namespace maskfill
