#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskfill/corpus.hpp"
#include "maskfill/error.hpp"
#include "maskfill/masked_corpus.hpp"
#include "maskfill/random.hpp"

namespace maskfill {

inline constexpr std::string_view kPromptInstruction =
    "Predict the [MASK] tokens in the given sentence";

/// Instruction/input/output triple for decoder-style models. `output` is
/// present only for fine-tuning examples.
struct Prompt {
  std::string instruction{kPromptInstruction};
  std::string input;
  std::optional<std::string> output;

  nlohmann::json to_json() const;
  bool operator==(const Prompt&) const = default;
};

/// One prompt per sentence; inputs are the merged masked sentences.
std::vector<Prompt> build_inference_prompts(const MaskedCorpus& masked);

/// One prompt per reference sentence: each token is independently replaced
/// by the marker with probability `mask_rate`, and the output is the
/// untouched sentence. Sentence i draws from `rng.stream(i)`.
std::vector<Prompt> build_finetune_prompts(const Corpus& reference, double mask_rate,
                                           const RandomSource& rng);

/// The generated text cannot be aligned to the masked sentence. Callers are
/// expected to fall back to another filler.
class ParseMisaligned : public Error {
 public:
  using Error::Error;
};

/// Recovers a filled sentence from free-form generated text. Unmasked tokens
/// are aligned to the generation via longest common subsequence; each marker
/// takes the generated token next to its left anchor (or right anchor for a
/// sentence-initial marker). `sentence` must already be merged.
Sentence parse_generation(std::string_view generated, const MaskedSentence& sentence);

}  // namespace maskfill
