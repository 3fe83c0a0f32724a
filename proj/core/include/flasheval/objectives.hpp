#pragma once

#include <span>
#include <string>
#include <vector>

#include "flasheval/ranking.hpp"
#include "flasheval/types.hpp"

namespace flasheval {

enum class ObjectiveKind { maximize_kd, minimize_mse };

// Subset quality criterion shared by every search method. Comparisons go
// through better()/better_or_tied() so callers never need to know the
// direction.
struct Objective {
  ObjectiveKind kind = ObjectiveKind::maximize_kd;

  bool higher_is_better() const { return kind == ObjectiveKind::maximize_kd; }

  // Strict "a beats b"; equal values are not better, which keeps
  // first-seen-wins tie-breaking deterministic.
  bool better(double a, double b) const {
    return higher_is_better() ? a > b : a < b;
  }
  bool better_or_equal(double a, double b) const { return !better(b, a); }

  double worst_value() const;
  std::string name() const;
  static Objective parse(const std::string& name);
};

// Mean squared gap between full-set and subset model means,
// (1/M) * sum_j (S_hat_j - S'_j)^2 over the given columns.
double estimation_error(const ScoreMatrix& scores, const SubsetIndex& subset,
                        std::span<const int> models);

// Dispatches to subset_kd or estimation_error.
double evaluate(const Objective& objective, const ScoreMatrix& scores,
                const SubsetIndex& subset, std::span<const int> models,
                const TieThresholds& thresholds);

// Precomputed evaluation context for one (matrix, model list) pair. Search
// methods score millions of subsets against the same columns; this caches
// the column-restricted scores, the full-set means and the pairwise
// thresholds once. Methods are const and safe to call concurrently.
class SubsetEvaluator {
 public:
  SubsetEvaluator(const ScoreMatrix& scores, std::span<const int> models,
                  const TieThresholds& thresholds);

  std::size_t n_prompts() const { return n_prompts_; }
  std::size_t n_models() const { return n_models_; }
  std::span<const double> ground_truth() const { return gt_; }

  double subset_kd(std::span<const std::uint32_t> rows) const;
  double estimation_error(std::span<const std::uint32_t> rows) const;
  double objective_value(const Objective& objective,
                         std::span<const std::uint32_t> rows) const;

 private:
  void subset_means(std::span<const std::uint32_t> rows,
                    std::vector<double>& out) const;

  std::size_t n_prompts_ = 0;
  std::size_t n_models_ = 0;
  std::vector<double> restricted_;  // n_prompts x n_models_, row-major
  std::vector<double> gt_;
  std::vector<double> thresholds_;
};

}  // namespace flasheval
