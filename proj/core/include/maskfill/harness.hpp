#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "maskfill/config.hpp"
#include "maskfill/corpus.hpp"
#include "maskfill/mask_filler.hpp"
#include "maskfill/masking.hpp"
#include "maskfill/report.hpp"
#include "maskfill/trigram_lm.hpp"

namespace maskfill {

/// Builds the masking policy for `technique`. `train` and `background` are
/// the corpora a vocabThres frequency table may be drawn from.
MaskPolicy make_policy(const ExperimentConfig& config, MaskTechnique technique,
                       const Corpus& train, const Corpus* background);

/// The configured filler: a builtin StatFiller (from a snapshot, else trained
/// on the background corpus) or a RemoteFiller connected to the endpoint.
FillerPtr make_filler(const ExperimentConfig& config);

/// Trains the downstream LM for `mode`; with a background corpus and
/// alpha < 1 the model is a count-space adaptation of a background model.
TrigramLM train_downstream(const ExperimentConfig& config, const Corpus& in_domain,
                           TrainingMode mode, const TrigramLM* background_lm);

struct MaskRunOutput {
  MaskTechnique technique;
  std::filesystem::path path;
  MaskStats stats;
};

/// Masks the training corpus with every configured technique, writing
/// masked.<technique>.txt and mask_stats.json under the output directory.
std::vector<MaskRunOutput> run_mask(const ExperimentConfig& config);

/// Mask statistics for every configured technique, without writing corpora.
std::vector<MaskRunOutput> compute_mask_stats(const ExperimentConfig& config);

/// Fills the configured masked corpus and writes the obfuscation corpus.
/// Returns the output path. `filler` overrides the configured filler.
std::filesystem::path run_fill(const ExperimentConfig& config, FillerPtr filler = nullptr);

/// Trains on the eval corpus under the eval mode and scores the test corpus.
PerplexityReport run_eval(const ExperimentConfig& config);

/// Runs every (method, technique) cell; failures are recorded in the report.
/// Writes report.json and report.txt under the output directory.
ExperimentReport run_experiment(const ExperimentConfig& config, FillerPtr filler = nullptr);

/// Overrides the experiment seed and every strategy seed.
void override_seed(ExperimentConfig& config, std::uint64_t seed);

}  // namespace maskfill
