// maskfill: mask, fill, and evaluate text corpora from a single JSON config.
//
//   maskfill mask --config exp.json
//   maskfill fill --config exp.json --input out/masked.vocabThres.txt --technique vocabThres
//   maskfill eval --config exp.json --mode baseline0 --train out/masked.vocabThres.txt
//   maskfill experiment --config exp.json --seed 7
//   maskfill stats out/masked.allowList.txt
//   maskfill generate --dir data/synthetic

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "maskfill/config.hpp"
#include "maskfill/corpus.hpp"
#include "maskfill/error.hpp"
#include "maskfill/harness.hpp"
#include "maskfill/masking.hpp"
#include "maskfill/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 2, kPartialFailure = 3, kTotalFailure = 4 };

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string filler;
  std::string endpoint;
  unsigned threads = 0;
};

maskfill::ExperimentConfig load_config(const GlobalOptions& g) {
  auto config = g.config.empty() ? maskfill::ExperimentConfig::from_json(json::object())
                                 : maskfill::ExperimentConfig::load(g.config);
  if (g.seed) maskfill::override_seed(config, *g.seed);
  if (!g.out.empty()) config.output_dir = g.out;
  if (!g.filler.empty()) config.filler.kind = g.filler;
  if (!g.endpoint.empty()) config.filler.endpoint = g.endpoint;
  if (g.threads > 0) config.threads = g.threads;
  return config;
}

int cmd_mask(const GlobalOptions& g) {
  const auto config = load_config(g);
  json stats = json::object();
  for (const auto& run : maskfill::run_mask(config)) {
    stats[std::string(maskfill::technique_name(run.technique))] = run.stats.to_json();
    std::cerr << "wrote " << run.path.string() << '\n';
  }
  std::cout << stats.dump(2) << '\n';
  return kOk;
}

int cmd_stats(const GlobalOptions& g, const std::vector<std::string>& files) {
  json out = json::object();
  if (files.empty()) {
    for (const auto& run : maskfill::compute_mask_stats(load_config(g))) {
      out[std::string(maskfill::technique_name(run.technique))] = run.stats.to_json();
    }
  } else {
    for (const auto& file : files) {
      const auto corpus = maskfill::load_corpus(file, maskfill::CorpusKind::kMasked);
      auto entry = maskfill::mask_stats(maskfill::MaskedCorpus::from_corpus(corpus)).to_json();
      entry["diagnostics"] = corpus.diagnostics().to_json();
      out[file] = entry;
    }
  }
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int cmd_fill(const GlobalOptions& g, const std::string& input, const std::string& output,
             const std::string& technique) {
  auto config = load_config(g);
  if (!input.empty()) config.fill_input = input;
  if (!output.empty()) config.fill_output = output;
  if (!technique.empty()) {
    config.fill_technique = maskfill::parse_technique(technique);
    if (!config.fill_technique) throw maskfill::ConfigError("unknown technique '" + technique + "'");
  }
  std::cout << maskfill::run_fill(config).string() << '\n';
  return kOk;
}

int cmd_eval(const GlobalOptions& g, const std::string& train, const std::string& mode) {
  auto config = load_config(g);
  if (!train.empty()) config.eval_train = train;
  if (!mode.empty()) {
    const auto parsed = maskfill::parse_mode(mode);
    if (!parsed) throw maskfill::ConfigError("unknown training mode '" + mode + "'");
    config.eval_mode = *parsed;
  }
  const auto report = maskfill::run_eval(config);
  const std::string text = report.to_json().dump();
  maskfill::write_file(config.output_dir / "eval.json", text + "\n");
  std::cout << text << '\n';
  return kOk;
}

int cmd_experiment(const GlobalOptions& g) {
  const auto config = load_config(g);
  const auto report = maskfill::run_experiment(config);
  std::cout << report.render_table();
  const auto failed = report.failed_cells();
  if (failed == 0) return kOk;
  std::cerr << failed << " of " << report.total_cells() << " cell(s) failed; see "
            << (config.output_dir / "report.json").string() << '\n';
  return failed == report.total_cells() ? kTotalFailure : kPartialFailure;
}

struct GenerateOptions {
  std::string dir = "synthetic";
  std::uint64_t seed = 1;
  std::size_t vocab = 200;
  std::size_t train = 5000;
  std::size_t test = 500;
  std::size_t background = 5000;
  std::size_t allow = 120;
  std::size_t n_keep = 100;
};

int cmd_generate(const GenerateOptions& o) {
  maskfill::SyntheticParams params;
  params.vocab_size = o.vocab;
  const maskfill::TrigramSource source(o.seed, params);
  const fs::path dir = o.dir;
  const auto background = source.sample(o.background, o.seed * 3 + 0);
  maskfill::save_corpus(source.sample(o.train, o.seed * 3 + 1), dir / "train.txt");
  maskfill::save_corpus(source.sample(o.test, o.seed * 3 + 2), dir / "test.txt");
  maskfill::save_corpus(background, dir / "background.txt");

  const auto table = maskfill::build_frequency_table(background);
  std::string allow;
  for (const auto& t : table.most_frequent(o.allow)) allow += t + "\n";
  maskfill::write_file(dir / "allow.txt", allow);

  // Every seventh word of the tail stands in for a named entity.
  std::string gazetteer;
  const auto& vocab = source.vocabulary();
  for (std::size_t i = vocab.size() / 2; i < vocab.size(); i += 7) gazetteer += vocab[i] + "\n";
  maskfill::write_file(dir / "gazetteer.txt", gazetteer);

  const json config = {
      {"corpora", {{"train", "train.txt"}, {"test", "test.txt"}, {"background", "background.txt"}}},
      {"masking",
       {{"allowList", {{"allow_file", "allow.txt"}}},
        {"vocabThres", {{"n_keep", o.n_keep}, {"freq_source", "background"}}},
        {"entityTagger", {{"gazetteer_file", "gazetteer.txt"}, {"capitalization", true}}}}},
      {"strategy", {{"strategy", "topk"}, {"k", 10}, {"rounds", 1}, {"tau", 0.5}}},
      {"methods", {"oracle", "baseline0", "baseline1", "top1", "topk", "topk_ft"}},
      {"filler", {{"kind", "builtin"}, {"mu", 1.0}}},
      {"lm", {{"lambda", {0.5, 0.5, 0.5}}, {"min_count", 1}, {"alpha", 1.0}}},
      {"seed", o.seed},
      {"threads", 1},
      {"output_dir", "out"}};
  maskfill::write_file(dir / "config.json", config.dump(2) + "\n");
  std::cout << (dir / "config.json").string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maskfill: privacy masking, mask filling, and downstream LM evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "Experiment config (JSON)");
  app.add_option("--seed", g.seed, "Override every sampling seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--filler", g.filler, "Mask filler")->check(CLI::IsMember({"builtin", "remote"}));
  app.add_option("--endpoint", g.endpoint, "Fill-mask service URL for --filler=remote");
  app.add_option("--threads", g.threads, "Worker threads");

  auto* mask = app.add_subcommand("mask", "Mask the training corpus with every configured technique");

  std::vector<std::string> stat_files;
  auto* stats = app.add_subcommand("stats", "Masked-token statistics");
  stats->add_option("files", stat_files, "Masked corpus files (default: mask per config)");

  std::string fill_input, fill_output, fill_technique;
  auto* fill = app.add_subcommand("fill", "Substitute masks to produce an obfuscation corpus");
  fill->add_option("--input", fill_input, "Masked corpus");
  fill->add_option("--output", fill_output, "Obfuscation corpus to write");
  fill->add_option("--technique", fill_technique, "Technique that produced the input");

  std::string eval_train, eval_mode;
  auto* eval = app.add_subcommand("eval", "Train the downstream LM and report test perplexity");
  eval->add_option("--train", eval_train, "Training corpus (default: corpora.train)");
  eval->add_option("--mode", eval_mode, "oracle | baseline0 | baseline1 | obfuscated");

  auto* experiment = app.add_subcommand("experiment", "Run the full method x technique matrix");

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic corpus set and config");
  generate->add_option("--dir", gen.dir, "Output directory");
  generate->add_option("--vocab", gen.vocab, "Vocabulary size");
  generate->add_option("--train-sentences", gen.train, "Training sentences");
  generate->add_option("--test-sentences", gen.test, "Test sentences");
  generate->add_option("--background-sentences", gen.background, "Background sentences");
  generate->add_option("--allow", gen.allow, "Allow-list size");
  generate->add_option("--n-keep", gen.n_keep, "vocabThres keep-set size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*mask) return cmd_mask(g);
    if (*stats) return cmd_stats(g, stat_files);
    if (*fill) return cmd_fill(g, fill_input, fill_output, fill_technique);
    if (*eval) return cmd_eval(g, eval_train, eval_mode);
    if (*experiment) return cmd_experiment(g);
    if (*generate) {
      if (g.seed) gen.seed = *g.seed;
      return cmd_generate(gen);
    }
  } catch (const maskfill::ConfigError& e) {
    std::cerr << "maskfill: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "maskfill: " << e.what() << '\n';
    return kTotalFailure;
  }
  return kOk;
}
