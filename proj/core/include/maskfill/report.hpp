#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskfill/masking.hpp"
#include "maskfill/trigram_lm.hpp"

namespace maskfill {

/// One (method, technique) cell: a perplexity or the error that prevented it.
struct CellResult {
  std::optional<PerplexityReport> report;
  std::string error;

  bool ok() const noexcept { return report.has_value(); }
};

/// Methods-by-techniques perplexity matrix plus per-technique mask statistics.
class ExperimentReport {
 public:
  ExperimentReport() = default;
  ExperimentReport(std::vector<std::string> methods, std::vector<std::string> techniques,
                   std::uint64_t seed);

  const std::vector<std::string>& methods() const noexcept { return methods_; }
  const std::vector<std::string>& techniques() const noexcept { return techniques_; }
  std::uint64_t seed() const noexcept { return seed_; }

  void set_cell(const std::string& method, const std::string& technique, CellResult cell);
  const CellResult& cell(const std::string& method, const std::string& technique) const;
  void set_mask_stats(const std::string& technique, const MaskStats& stats);
  const std::map<std::string, MaskStats>& mask_stats() const noexcept { return stats_; }

  std::size_t failed_cells() const;
  std::size_t total_cells() const { return methods_.size() * techniques_.size(); }

  /// Lowest-perplexity successful non-oracle method of a column, if any.
  std::optional<std::string> best_method(const std::string& technique) const;

  nlohmann::json to_json() const;
  static ExperimentReport from_json(const nlohmann::json& j);

  /// Methods as rows, techniques as columns, one decimal; the best
  /// non-oracle cell of each column carries a trailing '*'.
  std::string render_table() const;

 private:
  std::vector<std::string> methods_;
  std::vector<std::string> techniques_;
  std::uint64_t seed_ = 0;
  std::map<std::pair<std::string, std::string>, CellResult> cells_;
  std::map<std::string, MaskStats> stats_;
};

/// Round to one decimal, the precision reports are printed at.
double round1(double value);

}  // namespace maskfill
