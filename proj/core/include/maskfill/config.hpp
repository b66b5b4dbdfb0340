#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskfill/masking.hpp"
#include "maskfill/obfuscation.hpp"
#include "maskfill/trigram_lm.hpp"

namespace maskfill {

/// One "strategy" block: {"strategy", "k", "rounds", "seed", "tau", "rho",
/// "weighted_sampling", "inner"}.
struct StrategyConfig {
  std::string kind = "topk";  // top1 | topk | ft
  std::size_t k = 10;
  std::size_t rounds = 1;
  std::optional<std::uint64_t> seed;
  double tau = 0.5;
  double rho = 0.15;
  bool weighted_sampling = false;
  std::string inner = "topk";  // top1 | topk, used when kind == ft

  /// Fields missing from `j` keep the values in `defaults`.
  static StrategyConfig from_json(const nlohmann::json& j, const StrategyConfig& defaults);
  static StrategyConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  bool uses_sampling() const;
  FillStrategy to_strategy(const std::optional<TokenSet>& forbidden) const;
};

/// A report row: a training mode, or a fill strategy followed by
/// obfuscated-corpus training.
struct MethodConfig {
  std::string name;
  std::optional<TrainingMode> baseline;  // oracle / baseline0 / baseline1
  std::optional<StrategyConfig> strategy;
};

struct AllowListConfig {
  std::filesystem::path allow_file;
  bool case_fold = false;
};

struct VocabThresConfig {
  std::size_t n_keep = 10000;
  /// "background" or "train": the corpus the frequency table is built from.
  std::string freq_source = "background";
};

struct EntityTaggerConfig {
  std::optional<std::filesystem::path> gazetteer_file;
  bool capitalization = true;
  bool case_fold = false;
};

struct MaskingConfig {
  std::optional<AllowListConfig> allow_list;
  std::optional<VocabThresConfig> vocab_thres;
  std::optional<EntityTaggerConfig> entity_tagger;

  /// Configured techniques in report column order.
  std::vector<MaskTechnique> techniques() const;
};

struct FillerConfig {
  std::string kind = "builtin";  // builtin | remote
  std::string endpoint;
  double mu = 1.0;
  std::optional<std::filesystem::path> snapshot;
  std::int64_t timeout_ms = 10000;
  unsigned retries = 2;
  std::size_t max_connections = 4;
};

struct LmConfig {
  LmParams params;
  double alpha = 1.0;
};

struct ExperimentConfig {
  std::optional<std::filesystem::path> train;
  std::optional<std::filesystem::path> test;
  std::optional<std::filesystem::path> background;

  MaskingConfig masking;
  StrategyConfig strategy;
  std::vector<MethodConfig> methods;
  FillerConfig filler;
  LmConfig lm;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::filesystem::path output_dir = "out";

  // "fill" block
  std::optional<std::filesystem::path> fill_input;
  std::optional<std::filesystem::path> fill_output;
  std::optional<MaskTechnique> fill_technique;

  // "eval" block
  std::optional<std::filesystem::path> eval_train;
  TrainingMode eval_mode = TrainingMode::kOracle;

  /// Relative paths are resolved against `base_dir`. Throws ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& j,
                                    const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Seed for a strategy: its own seed, else the experiment seed. Throws
  /// ConfigError when a sampling strategy has neither.
  std::uint64_t seed_for(const StrategyConfig& strategy) const;
};

/// Checks that a configured path exists; throws ConfigError naming `what`.
const std::filesystem::path& require_path(const std::optional<std::filesystem::path>& path,
                                          const std::string& what);

MethodConfig parse_method(const nlohmann::json& j, const StrategyConfig& defaults);

}  // namespace maskfill
