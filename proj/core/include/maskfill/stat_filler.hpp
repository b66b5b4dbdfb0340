#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "maskfill/mask_filler.hpp"
#include "maskfill/trigram_lm.hpp"

namespace maskfill {

struct StatFillerParams {
  LmParams lm;
  /// Weight of in-domain counts added by finetune().
  double mu = 1.0;
};

/// Deterministic statistical filler. A candidate w for a marker with left
/// context (..., l2, l1) and first right token r1 scores
///   P(w | l2, l1) * P(r1 | l1, w)
/// under a trigram model; missing context is padded with <s> on the left and
/// </s> on the right. The pool is the model vocabulary without technical
/// symbols or the marker.
class StatFiller final : public MaskFiller {
 public:
  StatFiller(TrigramLM lm, double mu, std::uint64_t version = 0);

  /// Throws LmError on an empty corpus.
  static std::shared_ptr<const StatFiller> train(const Corpus& background,
                                                 const StatFillerParams& params = {});

  std::vector<FillCandidate> candidates(std::span<const Token> left, std::span<const Token> right,
                                        std::size_t k) const override;

  bool supports_finetune() const override { return true; }
  /// New filler whose counts are this filler's counts plus mu times the
  /// counts of `corpus`; the version number goes up by one.
  FillerPtr finetune(const Corpus& corpus) const override;
  std::shared_ptr<const StatFiller> finetuned(const Corpus& corpus) const;

  std::string version() const override { return "stat-" + std::to_string(version_); }
  std::uint64_t version_number() const noexcept { return version_; }

  /// The score formula for a single candidate.
  double score(std::string_view candidate, std::span<const Token> left,
               std::span<const Token> right) const;

  const std::vector<Token>& pool() const noexcept { return pool_; }
  const TrigramLM& lm() const noexcept { return lm_; }
  double mu() const noexcept { return mu_; }

  std::string snapshot() const;
  static std::shared_ptr<const StatFiller> from_snapshot(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static std::shared_ptr<const StatFiller> load(const std::filesystem::path& path);

 private:
  TrigramLM::Id context_id(std::string_view token) const;

  TrigramLM lm_;
  double mu_;
  std::uint64_t version_;
  std::vector<Token> pool_;
  std::vector<TrigramLM::Id> pool_ids_;
};

}  // namespace maskfill
