#include "flasheval/objectives.hpp"

#include <cassert>
#include <limits>

#include "flasheval/errors.hpp"

namespace flasheval {

double Objective::worst_value() const {
  return higher_is_better() ? -std::numeric_limits<double>::infinity()
                            : std::numeric_limits<double>::infinity();
}

std::string Objective::name() const {
  return kind == ObjectiveKind::maximize_kd ? "kd" : "mse";
}

Objective Objective::parse(const std::string& name) {
  if (name == "kd") return {ObjectiveKind::maximize_kd};
  if (name == "mse") return {ObjectiveKind::minimize_mse};
  throw ParseError("unknown objective (expected kd or mse): " + name);
}

double estimation_error(const ScoreMatrix& scores, const SubsetIndex& subset,
                        std::span<const int> models) {
  const auto gt = ground_truth_scores(scores, models);
  const auto approx = subset_scores(scores, subset, models);
  double acc = 0.0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const double d = gt[k] - approx[k];
    acc += d * d;
  }
  return acc / static_cast<double>(gt.size());
}

double evaluate(const Objective& objective, const ScoreMatrix& scores,
                const SubsetIndex& subset, std::span<const int> models,
                const TieThresholds& thresholds) {
  switch (objective.kind) {
    case ObjectiveKind::maximize_kd:
      return subset_kd(scores, subset, models, thresholds);
    case ObjectiveKind::minimize_mse:
      return estimation_error(scores, subset, models);
  }
  return 0.0;  // unreachable
}

SubsetEvaluator::SubsetEvaluator(const ScoreMatrix& scores,
                                 std::span<const int> models,
                                 const TieThresholds& thresholds)
    : n_prompts_(scores.n_prompts()), n_models_(models.size()) {
  if (thresholds.size() != scores.n_models()) {
    throw LengthMismatch("thresholds must cover every model column");
  }
  if (models.empty()) {
    throw EmptySelection("model column list is empty");
  }
  thresholds_ = restrict_thresholds(thresholds, models);
  restricted_.resize(n_prompts_ * n_models_);
  for (std::size_t i = 0; i < n_prompts_; ++i) {
    const auto row = scores.row(i);
    for (std::size_t k = 0; k < n_models_; ++k) {
      const int c = models[k];
      if (c < 0 || static_cast<std::size_t>(c) >= scores.n_models()) {
        throw ValidationError("model column index out of range");
      }
      restricted_[i * n_models_ + k] = row[static_cast<std::size_t>(c)];
    }
  }
  gt_.assign(n_models_, 0.0);
  for (std::size_t i = 0; i < n_prompts_; ++i) {
    for (std::size_t k = 0; k < n_models_; ++k) {
      gt_[k] += restricted_[i * n_models_ + k];
    }
  }
  for (double& v : gt_) v /= static_cast<double>(n_prompts_);
}

void SubsetEvaluator::subset_means(std::span<const std::uint32_t> rows,
                                   std::vector<double>& out) const {
  assert(!rows.empty());
  out.assign(n_models_, 0.0);
  for (const std::uint32_t i : rows) {
    const double* row = restricted_.data() + std::size_t{i} * n_models_;
    for (std::size_t k = 0; k < n_models_; ++k) out[k] += row[k];
  }
  for (double& v : out) v /= static_cast<double>(rows.size());
}

double SubsetEvaluator::subset_kd(std::span<const std::uint32_t> rows) const {
  std::vector<double> means;
  subset_means(rows, means);
  return kendall_tau(gt_, means, thresholds_);
}

double SubsetEvaluator::estimation_error(
    std::span<const std::uint32_t> rows) const {
  std::vector<double> means;
  subset_means(rows, means);
  double acc = 0.0;
  for (std::size_t k = 0; k < n_models_; ++k) {
    const double d = gt_[k] - means[k];
    acc += d * d;
  }
  return acc / static_cast<double>(n_models_);
}

double SubsetEvaluator::objective_value(
    const Objective& objective, std::span<const std::uint32_t> rows) const {
  return objective.kind == ObjectiveKind::maximize_kd ? subset_kd(rows)
                                                      : estimation_error(rows);
}

}  // namespace flasheval
