#include "maskfill/mask_filler.hpp"

#include <algorithm>
#include <stdexcept>

namespace maskfill {

bool ranks_before(const FillCandidate& a, const FillCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.token < b.token;
}

void sort_candidates(std::vector<FillCandidate>& candidates) {
  std::sort(candidates.begin(), candidates.end(), ranks_before);
}

bool is_ranked(const std::vector<FillCandidate>& candidates) {
  return std::is_sorted(candidates.begin(), candidates.end(), ranks_before);
}

std::shared_ptr<const MaskFiller> MaskFiller::finetune(const Corpus&) const {
  throw std::logic_error("this mask filler does not support fine-tuning");
}

}  // namespace maskfill
