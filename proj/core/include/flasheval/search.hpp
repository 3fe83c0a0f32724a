#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flasheval/objectives.hpp"
#include "flasheval/rng.hpp"
#include "flasheval/types.hpp"

namespace flasheval {

struct SearchConfig {
  std::size_t subset_size = 10;    // N'
  std::size_t sets_per_iter = 0;   // candidate subsets ranked per round
  std::size_t iterations = 5;      // filtering rounds before the final pick
  double keep_sets = 0.01;         // top fraction of sets counted, in (0, 1]
  double keep_prompts = 0.5;       // fraction of the pool kept, in (0, 1]
  Objective objective;
  std::uint64_t seed = 0;

  // Fills sets_per_iter from a total evaluation budget; the search spends
  // exactly sets_per_iter * (iterations + 1) objective evaluations.
  static SearchConfig from_budget(std::uint64_t budget, std::size_t subset_size,
                                  std::size_t iterations, std::uint64_t seed);

  std::uint64_t total_evaluations() const {
    return static_cast<std::uint64_t>(sets_per_iter) * (iterations + 1);
  }
  void validate() const;
};

struct IterationTrace {
  std::size_t iteration = 0;
  std::size_t population_size_before = 0;
  std::size_t population_size_after = 0;
  double best_kd = 0.0;            // running best objective value so far
  double mean_kd_selected = 0.0;   // mean objective over the kept sets
  std::optional<double> mean_kd_filtered;  // mean over rejected sets, if any
  std::size_t top_set_count = 0;
};

struct SearchReport {
  SubsetIndex best_subset;
  double best_objective_value = 0.0;
  std::string source;  // "final_round" or "iteration_<k>"
  std::vector<IterationTrace> traces;
  SearchConfig config;
  std::vector<int> train_models;
  std::vector<int> test_models;
  double train_kd = 0.0;
  std::optional<double> test_kd;
  double train_estimation_error = 0.0;
  std::optional<double> test_estimation_error;
  std::vector<std::string> best_prompt_ids;

  std::string to_json_string() const;
};

// sets_per_iter uniform without-replacement subsets of the population.
std::vector<SubsetIndex> construct_candidates(
    std::span<const std::uint32_t> population, std::size_t subset_size,
    std::size_t n_sets, Rng& rng, std::size_t n_prompts);

// Indices (into the candidate list) of the ceil(keep_sets * n) best
// candidates under the objective, first-seen order on ties.
std::vector<std::size_t> select_top_sets(std::span<const double> values,
                                         const Objective& objective,
                                         double keep_sets);

// Exact membership counts of every prompt across the selected sets.
std::vector<std::uint32_t> prompt_frequencies(
    std::span<const SubsetIndex> top_sets, std::size_t n_prompts);

// Keeps the max(floor(keep_prompts * |population|), floor_size) prompts with
// the highest counts, ties toward the lower index; result sorted ascending.
std::vector<std::uint32_t> filter_population(
    std::span<const std::uint32_t> frequencies,
    std::span<const std::uint32_t> population, double keep_prompts,
    std::size_t floor_size);

// Iterative set- and prompt-level filtering search over the train columns:
// each round ranks sets_per_iter random subsets of the current prompt pool,
// keeps the top keep_sets fraction, and shrinks the pool to the prompts
// appearing most frequently in those kept sets. After the last round one
// more batch is drawn from the final pool; the returned subset is the best
// one seen overall (`source` records whether the final round supplied it).
//
// Identical config gives an identical report for any thread count: threads
// only parallelize pure candidate evaluations.
SearchReport flasheval_search(const ScoreMatrix& scores,
                              std::span<const int> train_models,
                              const TieThresholds& thresholds,
                              const SearchConfig& config, int threads = 1);

}  // namespace flasheval
