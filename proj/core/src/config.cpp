#include "maskfill/config.hpp"

#include <fstream>
#include <set>

#include "maskfill/error.hpp"

namespace maskfill {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get_or(const json& j, const char* key, const T& fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

std::optional<fs::path> path_or(const json& j, const char* key, const fs::path& base,
                                const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string()) throw ConfigError(where + "." + key + " must be a path string");
  fs::path p = j.at(key).get<std::string>();
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

void check_strategy(const StrategyConfig& s) {
  if (s.kind != "top1" && s.kind != "topk" && s.kind != "ft") {
    throw ConfigError("strategy must be top1, topk or ft (got '" + s.kind + "')");
  }
  if (s.inner != "top1" && s.inner != "topk") {
    throw ConfigError("inner strategy must be top1 or topk (got '" + s.inner + "')");
  }
  if (s.k == 0) throw ConfigError("strategy k must be at least 1");
  if (s.rounds == 0) throw ConfigError("strategy rounds must be at least 1");
  if (!(s.tau >= 0.0 && s.tau <= 1.0)) throw ConfigError("strategy tau must lie in [0, 1]");
  if (!(s.rho >= 0.0 && s.rho <= 1.0)) throw ConfigError("strategy rho must lie in [0, 1]");
}

}  // namespace

StrategyConfig StrategyConfig::from_json(const json& j, const StrategyConfig& defaults) {
  check_keys(j, "strategy",
             {"name", "strategy", "k", "rounds", "seed", "tau", "rho", "weighted_sampling", "inner"});
  StrategyConfig s = defaults;
  s.kind = get_or(j, "strategy", s.kind, "strategy");
  s.k = get_or(j, "k", s.k, "strategy");
  s.rounds = get_or(j, "rounds", s.rounds, "strategy");
  if (j.contains("seed") && !j.at("seed").is_null()) {
    s.seed = get_or<std::uint64_t>(j, "seed", 0, "strategy");
  }
  s.tau = get_or(j, "tau", s.tau, "strategy");
  s.rho = get_or(j, "rho", s.rho, "strategy");
  s.weighted_sampling = get_or(j, "weighted_sampling", s.weighted_sampling, "strategy");
  s.inner = get_or(j, "inner", s.inner, "strategy");
  check_strategy(s);
  return s;
}

StrategyConfig StrategyConfig::from_json(const json& j) { return from_json(j, StrategyConfig{}); }

json StrategyConfig::to_json() const {
  json j = {{"strategy", kind},  {"k", k},     {"rounds", rounds},
            {"tau", tau},        {"rho", rho}, {"weighted_sampling", weighted_sampling},
            {"inner", inner}};
  j["seed"] = seed ? json(*seed) : json(nullptr);
  return j;
}

bool StrategyConfig::uses_sampling() const {
  return kind == "topk" || (kind == "ft" && inner == "topk");
}

FillStrategy StrategyConfig::to_strategy(const std::optional<TokenSet>& forbidden) const {
  const TopK topk{k, forbidden, weighted_sampling};
  if (kind == "top1") return Top1{};
  if (kind == "topk") return topk;
  FineTune ft;
  ft.rounds = rounds;
  ft.tau = tau;
  ft.inner = inner == "top1" ? InnerStrategy(Top1{}) : InnerStrategy(topk);
  return ft;
}

std::vector<MaskTechnique> MaskingConfig::techniques() const {
  std::vector<MaskTechnique> out;
  if (allow_list) out.push_back(MaskTechnique::kAllowList);
  if (vocab_thres) out.push_back(MaskTechnique::kVocabThres);
  if (entity_tagger) out.push_back(MaskTechnique::kEntityTagger);
  return out;
}

MethodConfig parse_method(const json& j, const StrategyConfig& defaults) {
  MethodConfig m;
  std::optional<json> overrides;
  if (j.is_string()) {
    m.name = j.get<std::string>();
  } else if (j.is_object()) {
    if (!j.contains("name") || !j.at("name").is_string()) {
      throw ConfigError("method objects need a string 'name'");
    }
    m.name = j.at("name").get<std::string>();
    overrides = j;
  } else {
    throw ConfigError("methods entries must be names or objects");
  }

  if (const auto mode = parse_mode(m.name); mode && *mode != TrainingMode::kObfuscated) {
    m.baseline = *mode;
    return m;
  }

  // Shorthand names set the strategy kind; an explicit "strategy" key wins.
  StrategyConfig base = defaults;
  if (m.name == "top1") {
    base.kind = "top1";
  } else if (m.name == "topk") {
    base.kind = "topk";
  } else if (m.name == "top1_ft") {
    base.kind = "ft";
    base.inner = "top1";
  } else if (m.name == "topk_ft") {
    base.kind = "ft";
    base.inner = "topk";
  } else if (!overrides || !overrides->contains("strategy")) {
    throw ConfigError("unknown method '" + m.name + "'");
  }
  m.strategy = overrides ? StrategyConfig::from_json(*overrides, base) : base;
  check_strategy(*m.strategy);
  return m;
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const fs::path& base_dir) {
  check_keys(j, "config",
             {"corpora", "masking", "strategy", "methods", "filler", "lm", "seed", "threads",
              "output_dir", "fill", "eval"});
  ExperimentConfig c;

  if (j.contains("corpora")) {
    const auto& corpora = j.at("corpora");
    check_keys(corpora, "corpora", {"train", "test", "background"});
    c.train = path_or(corpora, "train", base_dir, "corpora");
    c.test = path_or(corpora, "test", base_dir, "corpora");
    c.background = path_or(corpora, "background", base_dir, "corpora");
  }

  if (j.contains("masking")) {
    const auto& masking = j.at("masking");
    check_keys(masking, "masking", {"allowList", "vocabThres", "entityTagger"});
    if (masking.contains("allowList")) {
      const auto& a = masking.at("allowList");
      check_keys(a, "masking.allowList", {"allow_file", "case_fold"});
      AllowListConfig cfg;
      const auto file = path_or(a, "allow_file", base_dir, "masking.allowList");
      if (!file) throw ConfigError("masking.allowList needs allow_file");
      cfg.allow_file = *file;
      cfg.case_fold = get_or(a, "case_fold", false, "masking.allowList");
      c.masking.allow_list = cfg;
    }
    if (masking.contains("vocabThres")) {
      const auto& v = masking.at("vocabThres");
      check_keys(v, "masking.vocabThres", {"n_keep", "freq_source"});
      VocabThresConfig cfg;
      cfg.n_keep = get_or(v, "n_keep", cfg.n_keep, "masking.vocabThres");
      cfg.freq_source = get_or(v, "freq_source", cfg.freq_source, "masking.vocabThres");
      if (cfg.n_keep == 0) throw ConfigError("masking.vocabThres.n_keep must be at least 1");
      if (cfg.freq_source != "background" && cfg.freq_source != "train") {
        throw ConfigError("masking.vocabThres.freq_source must be background or train");
      }
      c.masking.vocab_thres = cfg;
    }
    if (masking.contains("entityTagger")) {
      const auto& e = masking.at("entityTagger");
      check_keys(e, "masking.entityTagger", {"gazetteer_file", "capitalization", "case_fold"});
      EntityTaggerConfig cfg;
      cfg.gazetteer_file = path_or(e, "gazetteer_file", base_dir, "masking.entityTagger");
      cfg.capitalization = get_or(e, "capitalization", cfg.capitalization, "masking.entityTagger");
      cfg.case_fold = get_or(e, "case_fold", cfg.case_fold, "masking.entityTagger");
      c.masking.entity_tagger = cfg;
    }
  }

  if (j.contains("strategy")) c.strategy = StrategyConfig::from_json(j.at("strategy"));

  if (j.contains("methods")) {
    if (!j.at("methods").is_array()) throw ConfigError("methods must be an array");
    std::set<std::string> seen;
    for (const auto& m : j.at("methods")) {
      auto method = parse_method(m, c.strategy);
      if (!seen.insert(method.name).second) {
        throw ConfigError("duplicate method '" + method.name + "'");
      }
      c.methods.push_back(std::move(method));
    }
  }

  if (j.contains("filler")) {
    const auto& f = j.at("filler");
    check_keys(f, "filler",
               {"kind", "endpoint", "mu", "snapshot", "timeout_ms", "retries", "max_connections"});
    c.filler.kind = get_or(f, "kind", c.filler.kind, "filler");
    c.filler.endpoint = get_or(f, "endpoint", c.filler.endpoint, "filler");
    c.filler.mu = get_or(f, "mu", c.filler.mu, "filler");
    c.filler.snapshot = path_or(f, "snapshot", base_dir, "filler");
    c.filler.timeout_ms = get_or(f, "timeout_ms", c.filler.timeout_ms, "filler");
    c.filler.retries = get_or(f, "retries", c.filler.retries, "filler");
    c.filler.max_connections = get_or(f, "max_connections", c.filler.max_connections, "filler");
    if (c.filler.kind != "builtin" && c.filler.kind != "remote") {
      throw ConfigError("filler.kind must be builtin or remote");
    }
    if (c.filler.mu < 0.0) throw ConfigError("filler.mu must be non-negative");
    if (c.filler.timeout_ms <= 0) throw ConfigError("filler.timeout_ms must be positive");
  }

  if (j.contains("lm")) {
    const auto& l = j.at("lm");
    check_keys(l, "lm", {"lambda", "min_count", "alpha"});
    if (l.contains("lambda")) {
      const auto lambdas = get_or<std::vector<double>>(l, "lambda", {}, "lm");
      if (lambdas.size() != 3) throw ConfigError("lm.lambda must list [lambda3, lambda2, lambda1]");
      c.lm.params.lambda3 = lambdas[0];
      c.lm.params.lambda2 = lambdas[1];
      c.lm.params.lambda1 = lambdas[2];
      for (double x : lambdas) {
        if (!(x > 0.0 && x < 1.0)) throw ConfigError("lm.lambda values must lie in (0, 1)");
      }
    }
    c.lm.params.min_count = get_or(l, "min_count", c.lm.params.min_count, "lm");
    c.lm.alpha = get_or(l, "alpha", c.lm.alpha, "lm");
    if (c.lm.params.min_count == 0) throw ConfigError("lm.min_count must be at least 1");
    if (!(c.lm.alpha >= 0.0 && c.lm.alpha <= 1.0)) throw ConfigError("lm.alpha must lie in [0, 1]");
  }

  if (j.contains("seed") && !j.at("seed").is_null()) {
    c.seed = get_or<std::uint64_t>(j, "seed", 0, "config");
  }
  c.threads = get_or(j, "threads", c.threads, "config");
  if (c.threads == 0) c.threads = 1;
  if (const auto out = path_or(j, "output_dir", base_dir, "config")) {
    c.output_dir = *out;
  } else if (!base_dir.empty()) {
    c.output_dir = base_dir / c.output_dir;
  }

  if (j.contains("fill")) {
    const auto& f = j.at("fill");
    check_keys(f, "fill", {"input", "output", "technique"});
    c.fill_input = path_or(f, "input", base_dir, "fill");
    c.fill_output = path_or(f, "output", base_dir, "fill");
    if (f.contains("technique") && !f.at("technique").is_null()) {
      const auto name = get_or<std::string>(f, "technique", "", "fill");
      c.fill_technique = parse_technique(name);
      if (!c.fill_technique) throw ConfigError("fill.technique '" + name + "' is unknown");
    }
  }

  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    check_keys(e, "eval", {"train", "mode"});
    c.eval_train = path_or(e, "train", base_dir, "eval");
    const auto name = get_or<std::string>(e, "mode", "oracle", "eval");
    const auto mode = parse_mode(name);
    if (!mode) throw ConfigError("eval.mode '" + name + "' is unknown");
    c.eval_mode = *mode;
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j, path.parent_path());
}

std::uint64_t ExperimentConfig::seed_for(const StrategyConfig& s) const {
  if (s.seed) return *s.seed;
  if (seed) return *seed;
  if (s.uses_sampling()) throw ConfigError("a seed is required for Top-K runs");
  return 0;
}

const fs::path& require_path(const std::optional<fs::path>& path, const std::string& what) {
  if (!path) throw ConfigError(what + " is not configured");
  if (!fs::exists(*path)) throw ConfigError(what + " '" + path->string() + "' does not exist");
  return *path;
}

}  // namespace maskfill
