#include "maskfill/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "maskfill/error.hpp"

namespace maskfill {
namespace {

using nlohmann::json;

constexpr const char* kReportFormat = "maskfill-experiment-report";
constexpr int kReportVersion = 1;

std::string fixed1(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", round1(value));
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

double round1(double value) { return std::round(value * 10.0) / 10.0; }

ExperimentReport::ExperimentReport(std::vector<std::string> methods,
                                   std::vector<std::string> techniques, std::uint64_t seed)
    : methods_(std::move(methods)), techniques_(std::move(techniques)), seed_(seed) {}

void ExperimentReport::set_cell(const std::string& method, const std::string& technique,
                                CellResult cell) {
  cells_[{method, technique}] = std::move(cell);
}

const CellResult& ExperimentReport::cell(const std::string& method,
                                         const std::string& technique) const {
  const auto it = cells_.find({method, technique});
  if (it == cells_.end()) throw Error("report has no cell " + method + "/" + technique);
  return it->second;
}

void ExperimentReport::set_mask_stats(const std::string& technique, const MaskStats& stats) {
  stats_[technique] = stats;
}

std::size_t ExperimentReport::failed_cells() const {
  std::size_t failed = 0;
  for (const auto& m : methods_) {
    for (const auto& t : techniques_) {
      const auto it = cells_.find({m, t});
      if (it == cells_.end() || !it->second.ok()) ++failed;
    }
  }
  return failed;
}

std::optional<std::string> ExperimentReport::best_method(const std::string& technique) const {
  std::optional<std::string> best;
  double best_ppl = 0.0;
  for (const auto& m : methods_) {
    if (m == "oracle") continue;
    const auto it = cells_.find({m, technique});
    if (it == cells_.end() || !it->second.ok()) continue;
    const double ppl = it->second.report->perplexity;
    if (!best || ppl < best_ppl) {
      best = m;
      best_ppl = ppl;
    }
  }
  return best;
}

json ExperimentReport::to_json() const {
  json cells = json::array();
  for (const auto& m : methods_) {
    for (const auto& t : techniques_) {
      json c = {{"method", m}, {"technique", t}};
      const auto it = cells_.find({m, t});
      if (it == cells_.end()) {
        c["error"] = "not run";
      } else if (it->second.ok()) {
        const auto& r = *it->second.report;
        c["ppl"] = round1(r.perplexity);
        c["ppl_exact"] = r.perplexity;
        c["tokens"] = r.token_count;
        c["oov_rate"] = r.oov_rate;
      } else {
        c["error"] = it->second.error;
      }
      cells.push_back(std::move(c));
    }
  }
  json stats = json::object();
  for (const auto& [t, s] : stats_) stats[t] = s.to_json();
  json best = json::object();
  for (const auto& t : techniques_) {
    if (auto b = best_method(t)) best[t] = *b;
  }
  return {{"format", kReportFormat}, {"version", kReportVersion}, {"seed", seed_},
          {"methods", methods_},     {"techniques", techniques_},  {"mask_stats", stats},
          {"cells", cells},          {"best", best}};
}

ExperimentReport ExperimentReport::from_json(const json& j) {
  try {
    if (j.at("format") != kReportFormat || j.at("version") != kReportVersion) {
      throw Error("unsupported report format");
    }
    ExperimentReport report(j.at("methods").get<std::vector<std::string>>(),
                            j.at("techniques").get<std::vector<std::string>>(),
                            j.at("seed").get<std::uint64_t>());
    for (const auto& [t, s] : j.at("mask_stats").items()) {
      MaskStats stats;
      stats.masked_tokens = s.at("masked").get<std::size_t>();
      stats.total_tokens = s.at("total").get<std::size_t>();
      stats.percent_masked = stats.total_tokens == 0
                                 ? 0.0
                                 : static_cast<double>(stats.masked_tokens) /
                                       static_cast<double>(stats.total_tokens);
      report.set_mask_stats(t, stats);
    }
    for (const auto& c : j.at("cells")) {
      CellResult cell;
      if (c.contains("error")) {
        cell.error = c.at("error").get<std::string>();
      } else {
        PerplexityReport r;
        r.perplexity = c.at("ppl_exact").get<double>();
        r.token_count = c.at("tokens").get<std::size_t>();
        r.oov_rate = c.at("oov_rate").get<double>();
        r.log_prob = -std::log(r.perplexity) * static_cast<double>(r.token_count);
        cell.report = r;
      }
      report.set_cell(c.at("method").get<std::string>(), c.at("technique").get<std::string>(),
                      std::move(cell));
    }
    return report;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed experiment report: ") + e.what());
  }
}

std::string ExperimentReport::render_table() const {
  std::size_t label_width = 6;
  for (const auto& m : methods_) label_width = std::max(label_width, m.size());
  std::vector<std::size_t> widths;
  for (const auto& t : techniques_) widths.push_back(std::max<std::size_t>(t.size(), 9));

  std::string out = "Perplexity (seed " + std::to_string(seed_) + ")\n";
  out += pad_right("method", label_width);
  for (std::size_t c = 0; c < techniques_.size(); ++c) out += "  " + pad_left(techniques_[c], widths[c]);
  out += '\n';
  for (const auto& m : methods_) {
    out += pad_right(m, label_width);
    for (std::size_t c = 0; c < techniques_.size(); ++c) {
      const auto it = cells_.find({m, techniques_[c]});
      std::string text = "failed";
      if (it != cells_.end() && it->second.ok()) {
        text = fixed1(it->second.report->perplexity);
        text += best_method(techniques_[c]) == m ? "*" : " ";
      } else {
        text += ' ';
      }
      out += "  " + pad_left(text, widths[c] + 1);
    }
    out += '\n';
  }

  if (!stats_.empty()) {
    out += "\nMasked tokens\n";
    out += pad_right("", label_width);
    for (std::size_t c = 0; c < techniques_.size(); ++c) out += "  " + pad_left(techniques_[c], widths[c]);
    out += '\n';
    out += pad_right("percent", label_width);
    for (std::size_t c = 0; c < techniques_.size(); ++c) {
      const auto it = stats_.find(techniques_[c]);
      const std::string text = it == stats_.end() ? "-" : fixed1(it->second.percent_rounded()) + "%";
      out += "  " + pad_left(text, widths[c]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace maskfill
