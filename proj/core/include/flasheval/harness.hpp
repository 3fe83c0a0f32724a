#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flasheval/ranking.hpp"
#include "flasheval/rng.hpp"
#include "flasheval/search.hpp"
#include "flasheval/types.hpp"

namespace flasheval {

enum class SplitKind { random, across_variants, across_schedules, explicit_ };

// How to partition the model zoo into train and test columns.
//   random:           seeded shuffle, first ceil(M/2) columns train
//   across_variants:  train = columns whose variant is listed
//   across_schedules: train = columns whose (solver, steps) is listed
//   explicit:         given column lists
struct SplitSpec {
  SplitKind kind = SplitKind::random;
  std::vector<std::string> train_variants;
  std::vector<std::pair<std::string, int>> train_schedules;
  std::vector<int> train_columns;
  std::vector<int> test_columns;

  static SplitSpec parse_json(const std::string& text);
  std::string label() const;
};

ModelSplit make_split(const std::vector<ModelSetting>& zoo,
                      const SplitSpec& spec, Rng& rng);

struct GeneralizationReport {
  double train_kd = 0.0;
  double test_kd = 0.0;
  double train_mse = 0.0;
  double test_mse = 0.0;
  bool train_degenerate = false;
  bool test_degenerate = false;
};

// Rank agreement and estimation error of one subset, computed independently
// on the train and test columns.
GeneralizationReport evaluate_generalization(const ScoreMatrix& scores,
                                             const SubsetIndex& subset,
                                             const ModelSplit& split,
                                             const TieThresholds& thresholds);

struct TopKReport {
  std::size_t k = 0;
  double topk_ranking_kd = 0.0;  // tau restricted to the true top-k columns
  double topk_proportion = 0.0;  // |true top-k  ∩  predicted top-k| / k
};

// Head-of-ranking diagnostics; top-k membership ties break toward the lower
// column index. k = 1 has no pairs to rank, so its ranking KD is the
// degenerate 0.
TopKReport topk_diagnostics(const ModelScoreVector& gt,
                            const ModelScoreVector& approx,
                            std::span<const double> thresholds, std::size_t k);

// Smallest step whose next `window` entries (inclusive) all lie within
// epsilon of each other; nullopt when no such window exists.
std::optional<int> saturation_point(
    std::span<const std::pair<int, double>> scores_by_step, double epsilon,
    std::size_t window);

struct ProxySearchResult {
  SearchReport report;      // best_subset indices refer to the full matrix
  double fidelity = 0.0;    // subset KD against the full ground truth (test)
  std::uint64_t rows_touched = 0;          // distinct score rows read
  std::uint64_t rows_touched_vanilla = 0;  // = n_prompts, for comparison
};

// Two-step search: draws a random pool of n_eval prompts, treats the pool
// means as ground truth while searching, then scores the winner against the
// full-set ground truth on the test columns. Only pool rows are ever read
// during the search, which is the point: scoring cost scales with n_eval.
ProxySearchResult neval_proxy_search(const ScoreMatrix& scores,
                                     std::size_t n_eval,
                                     const SearchConfig& config,
                                     const ModelSplit& split,
                                     const TieThresholds& thresholds, Rng& rng,
                                     int threads = 1);

}  // namespace flasheval
