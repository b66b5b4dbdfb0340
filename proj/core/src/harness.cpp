#include "maskfill/harness.hpp"

#include <fstream>
#include <memory>

#include "maskfill/entity_tagger.hpp"
#include "maskfill/error.hpp"
#include "maskfill/obfuscation.hpp"
#include "maskfill/remote_filler.hpp"
#include "maskfill/stat_filler.hpp"

namespace maskfill {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<Corpus> load_background(const ExperimentConfig& config) {
  if (!config.background) return std::nullopt;
  return load_corpus(require_path(config.background, "corpora.background"));
}

std::vector<MethodConfig> methods_or_default(const ExperimentConfig& config) {
  if (!config.methods.empty()) return config.methods;
  std::vector<MethodConfig> out;
  for (const char* name : {"oracle", "baseline0", "baseline1", "top1", "topk"}) {
    out.push_back(parse_method(json(name), config.strategy));
  }
  return out;
}

}  // namespace

MaskPolicy make_policy(const ExperimentConfig& config, MaskTechnique technique,
                       const Corpus& train, const Corpus* background) {
  switch (technique) {
    case MaskTechnique::kAllowList: {
      if (!config.masking.allow_list) throw ConfigError("masking.allowList is not configured");
      const auto& cfg = *config.masking.allow_list;
      return AllowListPolicy(load_token_list(require_path(cfg.allow_file, "masking.allowList.allow_file")),
                             cfg.case_fold);
    }
    case MaskTechnique::kVocabThres: {
      if (!config.masking.vocab_thres) throw ConfigError("masking.vocabThres is not configured");
      const auto& cfg = *config.masking.vocab_thres;
      // Without a background corpus the table comes from the training corpus.
      const Corpus& source = (cfg.freq_source == "background" && background) ? *background : train;
      return VocabThresPolicy(build_frequency_table(source), cfg.n_keep);
    }
    case MaskTechnique::kEntityTagger: {
      if (!config.masking.entity_tagger) throw ConfigError("masking.entityTagger is not configured");
      const auto& cfg = *config.masking.entity_tagger;
      std::vector<Token> gazetteer;
      if (cfg.gazetteer_file) {
        gazetteer = load_token_list(require_path(cfg.gazetteer_file, "masking.entityTagger.gazetteer_file"));
      }
      return EntityTaggerPolicy{
          std::make_shared<GazetteerTagger>(gazetteer, cfg.capitalization, cfg.case_fold)};
    }
  }
  throw ConfigError("unknown masking technique");
}

FillerPtr make_filler(const ExperimentConfig& config) {
  if (config.filler.kind == "remote") {
    if (config.filler.endpoint.empty()) throw ConfigError("filler.endpoint is required for remote");
    ServiceEndpoint endpoint;
    endpoint.base_url = config.filler.endpoint;
    endpoint.timeout = std::chrono::milliseconds(config.filler.timeout_ms);
    endpoint.retries = config.filler.retries;
    endpoint.max_connections = config.filler.max_connections;
    return RemoteFiller::connect(endpoint);
  }
  if (config.filler.snapshot && fs::exists(*config.filler.snapshot)) {
    return StatFiller::load(*config.filler.snapshot);
  }
  const auto background = load_background(config);
  if (!background) {
    throw ConfigError("the builtin filler needs corpora.background or an existing filler.snapshot");
  }
  auto filler = StatFiller::train(*background, {config.lm.params, config.filler.mu});
  if (config.filler.snapshot) filler->save(*config.filler.snapshot);
  return filler;
}

TrigramLM train_downstream(const ExperimentConfig& config, const Corpus& in_domain,
                           TrainingMode mode, const TrigramLM* background_lm) {
  if (background_lm && config.lm.alpha < 1.0) {
    return adapt_lm(*background_lm, in_domain, config.lm.alpha, mode);
  }
  return train_lm(in_domain, mode, config.lm.params);
}

std::vector<MaskRunOutput> compute_mask_stats(const ExperimentConfig& config) {
  const auto techniques = config.masking.techniques();
  if (techniques.empty()) throw ConfigError("no masking technique is configured");
  const Corpus train = load_corpus(require_path(config.train, "corpora.train"));
  const auto background = load_background(config);

  std::vector<MaskRunOutput> out;
  for (const auto technique : techniques) {
    const MaskPolicy policy = make_policy(config, technique, train, background ? &*background : nullptr);
    const MaskedCorpus masked = mask_corpus(train, policy, config.threads);
    out.push_back({technique,
                   config.output_dir / ("masked." + std::string(technique_name(technique)) + ".txt"),
                   mask_stats(masked)});
  }
  return out;
}

std::vector<MaskRunOutput> run_mask(const ExperimentConfig& config) {
  const auto techniques = config.masking.techniques();
  if (techniques.empty()) throw ConfigError("no masking technique is configured");
  const Corpus train = load_corpus(require_path(config.train, "corpora.train"));
  const auto background = load_background(config);

  std::vector<MaskRunOutput> out;
  json stats = json::object();
  for (const auto technique : techniques) {
    const MaskPolicy policy = make_policy(config, technique, train, background ? &*background : nullptr);
    const MaskedCorpus masked = mask_corpus(train, policy, config.threads);
    const std::string name(technique_name(technique));
    const fs::path path = config.output_dir / ("masked." + name + ".txt");
    save_corpus(masked.to_corpus(), path);
    const MaskStats s = mask_stats(masked);
    stats[name] = s.to_json();
    out.push_back({technique, path, s});
  }
  write_file(config.output_dir / "mask_stats.json", stats.dump(2) + "\n");
  return out;
}

fs::path run_fill(const ExperimentConfig& config, FillerPtr filler) {
  const fs::path& input = require_path(config.fill_input, "fill.input");
  const MaskedCorpus masked = MaskedCorpus::from_corpus(load_corpus(input, CorpusKind::kMasked));

  std::optional<TokenSet> forbidden;
  if (config.fill_technique && *config.fill_technique != MaskTechnique::kEntityTagger) {
    const Corpus train = load_corpus(require_path(config.train, "corpora.train"));
    const auto background = load_background(config);
    forbidden = forbidden_tokens(
        make_policy(config, *config.fill_technique, train, background ? &*background : nullptr));
  }

  const std::uint64_t seed = config.seed_for(config.strategy);
  if (!filler) filler = make_filler(config);
  const Corpus filled = obfuscate_corpus(masked, config.strategy.to_strategy(forbidden), filler,
                                         RandomSource(seed), {config.threads});
  const fs::path output = config.fill_output.value_or(config.output_dir / "obfuscated.txt");
  save_corpus(filled, output);
  return output;
}

PerplexityReport run_eval(const ExperimentConfig& config) {
  const auto& train_path = config.eval_train ? config.eval_train : config.train;
  const bool masked_input =
      config.eval_mode == TrainingMode::kBaseline0 || config.eval_mode == TrainingMode::kBaseline1;
  const Corpus train = load_corpus(require_path(train_path, "eval.train"),
                                   masked_input ? CorpusKind::kMasked : CorpusKind::kUnmasked);
  const Corpus test = load_corpus(require_path(config.test, "corpora.test"));

  std::optional<TrigramLM> background_lm;
  if (config.background && config.lm.alpha < 1.0) {
    background_lm = train_lm(*load_background(config), TrainingMode::kOracle, config.lm.params);
  }
  const TrigramLM lm =
      train_downstream(config, train, config.eval_mode, background_lm ? &*background_lm : nullptr);
  return perplexity(lm, test, config.threads);
}

ExperimentReport run_experiment(const ExperimentConfig& config, FillerPtr filler) {
  const auto techniques = config.masking.techniques();
  if (techniques.empty()) throw ConfigError("no masking technique is configured");
  const auto methods = methods_or_default(config);
  for (const auto& m : methods) {
    if (!m.strategy) continue;
    config.seed_for(*m.strategy);
    if (config.filler.kind == "remote" && config.filler.endpoint.empty()) {
      throw ConfigError("filler.endpoint is required for remote");
    }
  }

  const Corpus train = load_corpus(require_path(config.train, "corpora.train"));
  const Corpus test = load_corpus(require_path(config.test, "corpora.test"));
  const auto background = load_background(config);
  std::optional<TrigramLM> background_lm;
  if (background && config.lm.alpha < 1.0) {
    background_lm = train_lm(*background, TrainingMode::kOracle, config.lm.params);
  }
  const TrigramLM* bg = background_lm ? &*background_lm : nullptr;

  std::vector<std::string> method_names;
  for (const auto& m : methods) method_names.push_back(m.name);
  std::vector<std::string> technique_names;
  for (const auto t : techniques) technique_names.emplace_back(technique_name(t));
  ExperimentReport report(method_names, technique_names, config.seed.value_or(0));

  std::optional<CellResult> oracle;
  auto oracle_cell = [&]() -> const CellResult& {
    if (!oracle) {
      oracle.emplace();
      try {
        oracle->report = perplexity(train_downstream(config, train, TrainingMode::kOracle, bg), test,
                                    config.threads);
      } catch (const std::exception& e) {
        oracle->error = e.what();
      }
    }
    return *oracle;
  };

  std::optional<std::string> filler_error;
  auto get_filler = [&]() -> FillerPtr {
    if (!filler && !filler_error) {
      try {
        filler = make_filler(config);
      } catch (const std::exception& e) {
        filler_error = e.what();
      }
    }
    if (!filler) throw Error("filler unavailable: " + *filler_error);
    return filler;
  };

  for (std::size_t c = 0; c < techniques.size(); ++c) {
    const std::string& tname = technique_names[c];
    std::optional<MaskPolicy> policy;
    std::optional<MaskedCorpus> masked;
    std::string column_error;
    try {
      policy = make_policy(config, techniques[c], train, background ? &*background : nullptr);
      masked = mask_corpus(train, *policy, config.threads);
      report.set_mask_stats(tname, mask_stats(*masked));
      save_corpus(masked->to_corpus(), config.output_dir / ("masked." + tname + ".txt"));
    } catch (const std::exception& e) {
      column_error = std::string("masking failed: ") + e.what();
    }

    for (const auto& method : methods) {
      CellResult cell;
      if (!masked) {
        cell.error = column_error;
      } else if (method.baseline == TrainingMode::kOracle) {
        cell = oracle_cell();
      } else {
        try {
          if (method.baseline) {
            cell.report = perplexity(
                train_downstream(config, masked->to_corpus(), *method.baseline, bg), test,
                config.threads);
          } else {
            const auto& s = *method.strategy;
            const Corpus filled =
                obfuscate_corpus(*masked, s.to_strategy(forbidden_tokens(*policy)), get_filler(),
                                 RandomSource(config.seed_for(s)), {config.threads});
            save_corpus(filled,
                        config.output_dir / ("obfuscated." + method.name + "." + tname + ".txt"));
            cell.report = perplexity(
                train_downstream(config, filled, TrainingMode::kObfuscated, bg), test,
                config.threads);
          }
        } catch (const std::exception& e) {
          cell.error = e.what();
        }
      }
      report.set_cell(method.name, tname, std::move(cell));
    }
  }

  write_file(config.output_dir / "report.json", report.to_json().dump(2) + "\n");
  write_file(config.output_dir / "report.txt", report.render_table());
  return report;
}

void override_seed(ExperimentConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.strategy.seed.reset();
  for (auto& m : config.methods) {
    if (m.strategy) m.strategy->seed.reset();
  }
}

}  // namespace maskfill
