#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flasheval/types.hpp"

namespace flasheval {

// Mean score per selected model column. `values[k]` belongs to the k-th
// entry of the model list the vector was computed for.
struct ModelScoreVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t k) const { return values[k]; }
};

enum class PairClass {
  concordant,
  discordant,
  tie_gt_only,
  tie_approx_only,
  tie_both,
};

// Outcome tallies over all model pairs; components always sum to
// M*(M-1)/2 for M compared models.
struct PairCounts {
  std::uint64_t concordant = 0;
  std::uint64_t discordant = 0;
  std::uint64_t ties_gt_only = 0;
  std::uint64_t ties_approx_only = 0;
  std::uint64_t ties_both = 0;

  std::uint64_t total() const {
    return concordant + discordant + ties_gt_only + ties_approx_only +
           ties_both;
  }
};

struct TauResult {
  double value = 0.0;
  bool degenerate = false;  // a denominator factor was 0; value forced to 0
  PairCounts counts;
};

// Mean of each selected column over all prompts.
ModelScoreVector ground_truth_scores(const ScoreMatrix& scores,
                                     std::span<const int> models);

// Mean of each selected column over the subset rows only.
ModelScoreVector subset_scores(const ScoreMatrix& scores,
                               const SubsetIndex& subset,
                               std::span<const int> models);

// A side is tied when the score gap is strictly below its threshold;
// threshold 0 therefore recovers exact-equality ties only.
PairClass classify_pair(double gt_i, double gt_j, double approx_i,
                        double approx_j, double t_gt, double t_approx);

// Pair tallies with the per-pair threshold max(thresholds[i], thresholds[j])
// applied to both the ground-truth and the approximated side.
PairCounts count_pairs(std::span<const double> gt,
                       std::span<const double> approx,
                       std::span<const double> thresholds);

// Tie-aware rank correlation
//   (N_c - N_d) / sqrt((N_c + N_d + n_1) (N_c + N_d + n_2))
// where n_1 / n_2 count pairs tied only on the ground-truth / only on the
// approximated side. When either factor under the root is 0 the ranking
// carries no ordering information and the result is 0 with `degenerate` set.
TauResult kendall_tau_detailed(std::span<const double> gt,
                               std::span<const double> approx,
                               std::span<const double> thresholds);

double kendall_tau(std::span<const double> gt, std::span<const double> approx,
                   std::span<const double> thresholds);

// Rank agreement of a subset: kendall_tau between full-set and subset-mean
// model scores on the given columns.
double subset_kd(const ScoreMatrix& scores, const SubsetIndex& subset,
                 std::span<const int> models, const TieThresholds& thresholds);

// Restriction of full-matrix thresholds to a model column list.
std::vector<double> restrict_thresholds(const TieThresholds& thresholds,
                                        std::span<const int> models);

}  // namespace flasheval
