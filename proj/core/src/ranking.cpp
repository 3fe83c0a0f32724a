#include "flasheval/ranking.hpp"

#include <cmath>
#include <string>

#include "flasheval/errors.hpp"

namespace flasheval {
namespace {

void check_models(std::span<const int> models, std::size_t n_models) {
  if (models.empty()) {
    throw EmptySelection("model column list is empty");
  }
  for (const int c : models) {
    if (c < 0 || static_cast<std::size_t>(c) >= n_models) {
      throw ValidationError("model column index out of range: " +
                            std::to_string(c));
    }
  }
}

}  // namespace

ModelScoreVector ground_truth_scores(const ScoreMatrix& scores,
                                     std::span<const int> models) {
  check_models(models, scores.n_models());
  ModelScoreVector out;
  out.values.assign(models.size(), 0.0);
  for (std::size_t i = 0; i < scores.n_prompts(); ++i) {
    const auto row = scores.row(i);
    for (std::size_t k = 0; k < models.size(); ++k) {
      out.values[k] += row[static_cast<std::size_t>(models[k])];
    }
  }
  for (double& v : out.values) v /= static_cast<double>(scores.n_prompts());
  return out;
}

ModelScoreVector subset_scores(const ScoreMatrix& scores,
                               const SubsetIndex& subset,
                               std::span<const int> models) {
  if (subset.empty()) {
    throw EmptySelection("subset is empty");
  }
  check_models(models, scores.n_models());
  ModelScoreVector out;
  out.values.assign(models.size(), 0.0);
  for (const std::uint32_t i : subset.indices()) {
    const auto row = scores.row(i);
    for (std::size_t k = 0; k < models.size(); ++k) {
      out.values[k] += row[static_cast<std::size_t>(models[k])];
    }
  }
  for (double& v : out.values) v /= static_cast<double>(subset.size());
  return out;
}

PairClass classify_pair(double gt_i, double gt_j, double approx_i,
                        double approx_j, double t_gt, double t_approx) {
  // Strictly-below-threshold gaps tie; exact equality ties at any threshold,
  // so threshold 0 means exact-equality ties only.
  const bool gt_tied = std::abs(gt_i - gt_j) < t_gt || gt_i == gt_j;
  const bool approx_tied =
      std::abs(approx_i - approx_j) < t_approx || approx_i == approx_j;
  if (gt_tied && approx_tied) return PairClass::tie_both;
  if (gt_tied) return PairClass::tie_gt_only;
  if (approx_tied) return PairClass::tie_approx_only;
  const bool same_direction = (gt_i < gt_j) == (approx_i < approx_j);
  return same_direction ? PairClass::concordant : PairClass::discordant;
}

PairCounts count_pairs(std::span<const double> gt,
                       std::span<const double> approx,
                       std::span<const double> thresholds) {
  PairCounts counts;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = i + 1; j < gt.size(); ++j) {
      const double t = std::max(thresholds[i], thresholds[j]);
      switch (classify_pair(gt[i], gt[j], approx[i], approx[j], t, t)) {
        case PairClass::concordant: ++counts.concordant; break;
        case PairClass::discordant: ++counts.discordant; break;
        case PairClass::tie_gt_only: ++counts.ties_gt_only; break;
        case PairClass::tie_approx_only: ++counts.ties_approx_only; break;
        case PairClass::tie_both: ++counts.ties_both; break;
      }
    }
  }
  return counts;
}

TauResult kendall_tau_detailed(std::span<const double> gt,
                               std::span<const double> approx,
                               std::span<const double> thresholds) {
  if (gt.size() != approx.size() || gt.size() != thresholds.size()) {
    throw LengthMismatch("score vectors and thresholds must share a length");
  }
  if (gt.size() < 2) {
    throw TooFewModels("rank correlation needs at least 2 models");
  }
  TauResult result;
  result.counts = count_pairs(gt, approx, thresholds);
  const auto& c = result.counts;
  const double lhs =
      static_cast<double>(c.concordant + c.discordant + c.ties_gt_only);
  const double rhs =
      static_cast<double>(c.concordant + c.discordant + c.ties_approx_only);
  if (lhs == 0.0 || rhs == 0.0) {
    result.degenerate = true;
    result.value = 0.0;
    return result;
  }
  result.value = (static_cast<double>(c.concordant) -
                  static_cast<double>(c.discordant)) /
                 std::sqrt(lhs * rhs);
  return result;
}

double kendall_tau(std::span<const double> gt, std::span<const double> approx,
                   std::span<const double> thresholds) {
  return kendall_tau_detailed(gt, approx, thresholds).value;
}

std::vector<double> restrict_thresholds(const TieThresholds& thresholds,
                                        std::span<const int> models) {
  std::vector<double> out;
  out.reserve(models.size());
  for (const int c : models) {
    if (c < 0 || static_cast<std::size_t>(c) >= thresholds.size()) {
      throw ValidationError("threshold index out of range");
    }
    out.push_back(thresholds[static_cast<std::size_t>(c)]);
  }
  return out;
}

double subset_kd(const ScoreMatrix& scores, const SubsetIndex& subset,
                 std::span<const int> models,
                 const TieThresholds& thresholds) {
  if (thresholds.size() != scores.n_models()) {
    throw LengthMismatch("thresholds must cover every model column");
  }
  const auto gt = ground_truth_scores(scores, models);
  const auto approx = subset_scores(scores, subset, models);
  const auto t = restrict_thresholds(thresholds, models);
  return kendall_tau(gt.values, approx.values, t);
}

}  // namespace flasheval
