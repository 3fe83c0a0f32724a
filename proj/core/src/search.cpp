#include "flasheval/search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "flasheval/errors.hpp"
#include "flasheval/parallel.hpp"

namespace flasheval {
namespace {

std::size_t keep_count(double ratio, std::size_t size) {
  return static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(size)));
}

}  // namespace

SearchConfig SearchConfig::from_budget(std::uint64_t budget,
                                       std::size_t subset_size,
                                       std::size_t iterations,
                                       std::uint64_t seed) {
  SearchConfig config;
  config.subset_size = subset_size;
  config.iterations = iterations;
  config.sets_per_iter = static_cast<std::size_t>(budget / (iterations + 1));
  config.seed = seed;
  return config;
}

void SearchConfig::validate() const {
  if (subset_size < 1) {
    throw ValidationError("subset size must be >= 1");
  }
  if (sets_per_iter < 1) {
    throw ValidationError("sets_per_iter must be >= 1");
  }
  if (!(keep_sets > 0.0) || keep_sets > 1.0) {
    throw ValidationError("keep_sets must be in (0, 1]");
  }
  if (!(keep_prompts > 0.0) || keep_prompts > 1.0) {
    throw ValidationError("keep_prompts must be in (0, 1]");
  }
}

std::vector<SubsetIndex> construct_candidates(
    std::span<const std::uint32_t> population, std::size_t subset_size,
    std::size_t n_sets, Rng& rng, std::size_t n_prompts) {
  if (population.size() < subset_size) {
    throw PopulationExhausted("population smaller than the subset size");
  }
  std::vector<SubsetIndex> candidates;
  candidates.reserve(n_sets);
  detail::SampleScratch scratch;
  scratch.reset(population.size());
  std::vector<std::uint32_t> positions;
  std::vector<std::uint32_t> rows(subset_size);
  for (std::size_t s = 0; s < n_sets; ++s) {
    detail::sample_positions(scratch, subset_size, rng, positions);
    for (std::size_t i = 0; i < subset_size; ++i) {
      rows[i] = population[positions[i]];
    }
    candidates.emplace_back(rows, n_prompts);
  }
  return candidates;
}

std::vector<std::size_t> select_top_sets(std::span<const double> values,
                                         const Objective& objective,
                                         double keep_sets) {
  if (values.empty()) {
    throw EmptySelection("no candidates to select from");
  }
  if (!(keep_sets > 0.0) || keep_sets > 1.0) {
    throw ValidationError("keep_sets must be in (0, 1]");
  }
  const std::size_t keep =
      std::min(values.size(),
               static_cast<std::size_t>(
                   std::ceil(keep_sets * static_cast<double>(values.size()))));
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0u);
  // stable: first-seen order wins among equal values
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return objective.better(values[a], values[b]);
                   });
  order.resize(keep);
  return order;
}

std::vector<std::uint32_t> prompt_frequencies(
    std::span<const SubsetIndex> top_sets, std::size_t n_prompts) {
  if (top_sets.empty()) {
    throw EmptySelection("no selected sets to count over");
  }
  std::vector<std::uint32_t> counts(n_prompts, 0);
  for (const auto& set : top_sets) {
    for (const std::uint32_t i : set.indices()) ++counts[i];
  }
  return counts;
}

std::vector<std::uint32_t> filter_population(
    std::span<const std::uint32_t> frequencies,
    std::span<const std::uint32_t> population, double keep_prompts,
    std::size_t floor_size) {
  if (population.empty()) {
    throw EmptySelection("population is empty");
  }
  const std::size_t keep = std::min(
      population.size(),
      std::max(keep_count(keep_prompts, population.size()), floor_size));
  std::vector<std::uint32_t> ranked(population.begin(), population.end());
  std::sort(ranked.begin(), ranked.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              if (frequencies[a] != frequencies[b]) {
                return frequencies[a] > frequencies[b];
              }
              return a < b;
            });
  ranked.resize(keep);
  std::sort(ranked.begin(), ranked.end());
  return ranked;
}

SearchReport flasheval_search(const ScoreMatrix& scores,
                              std::span<const int> train_models,
                              const TieThresholds& thresholds,
                              const SearchConfig& config, int threads) {
  config.validate();
  const std::size_t n = scores.n_prompts();
  if (config.subset_size > n) {
    throw SizeError("subset size exceeds the number of prompts");
  }
  if (config.objective.kind == ObjectiveKind::maximize_kd &&
      train_models.size() < 2) {
    throw TooFewModels("the KD objective needs at least 2 train models");
  }
  const SubsetEvaluator evaluator(scores, train_models, thresholds);
  Rng rng(config.seed);

  std::vector<std::uint32_t> population(n);
  std::iota(population.begin(), population.end(), 0u);

  SearchReport report;
  report.config = config;
  report.train_models.assign(train_models.begin(), train_models.end());

  double best_value = config.objective.worst_value();
  std::vector<std::uint32_t> best_rows;
  std::string best_source;

  std::vector<double> values;
  const auto run_round = [&](const std::string& source) {
    const auto candidates = construct_candidates(
        population, config.subset_size, config.sets_per_iter, rng, n);
    values.assign(candidates.size(), 0.0);
    parallel_for(candidates.size(), threads, [&](std::size_t i) {
      values[i] =
          evaluator.objective_value(config.objective, candidates[i].indices());
    });
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (config.objective.better(values[i], best_value) ||
          best_rows.empty()) {
        best_value = values[i];
        best_rows.assign(candidates[i].indices().begin(),
                         candidates[i].indices().end());
        best_source = source;
      }
    }
    return candidates;
  };

  for (std::size_t iter = 0; iter < config.iterations; ++iter) {
    if (keep_count(config.keep_prompts, population.size()) <
        config.subset_size) {
      throw PopulationExhausted(
          "keep_prompts would shrink the pool below the subset size at "
          "iteration " +
          std::to_string(iter + 1));
    }
    IterationTrace trace;
    trace.iteration = iter + 1;
    trace.population_size_before = population.size();

    const auto candidates = run_round("iteration_" + std::to_string(iter + 1));
    const auto selected =
        select_top_sets(values, config.objective, config.keep_sets);
    trace.top_set_count = selected.size();
    trace.best_kd = best_value;

    std::vector<SubsetIndex> top_sets;
    top_sets.reserve(selected.size());
    double selected_sum = 0.0;
    std::vector<bool> is_selected(candidates.size(), false);
    for (const std::size_t idx : selected) {
      top_sets.push_back(candidates[idx]);
      selected_sum += values[idx];
      is_selected[idx] = true;
    }
    trace.mean_kd_selected =
        selected_sum / static_cast<double>(selected.size());
    if (selected.size() < candidates.size()) {
      double filtered_sum = 0.0;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!is_selected[i]) filtered_sum += values[i];
      }
      trace.mean_kd_filtered =
          filtered_sum /
          static_cast<double>(candidates.size() - selected.size());
    }

    const auto frequencies = prompt_frequencies(top_sets, n);
    population = filter_population(frequencies, population,
                                   config.keep_prompts, config.subset_size);
    trace.population_size_after = population.size();
    report.traces.push_back(std::move(trace));
  }

  run_round("final_round");

  report.best_subset = SubsetIndex(best_rows, n);
  report.best_objective_value = best_value;
  report.source = best_source;
  report.train_kd = evaluator.subset_kd(report.best_subset.indices());
  report.train_estimation_error =
      evaluator.estimation_error(report.best_subset.indices());
  report.best_prompt_ids.reserve(report.best_subset.size());
  for (const std::uint32_t i : report.best_subset.indices()) {
    report.best_prompt_ids.push_back(scores.prompt_ids()[i]);
  }
  return report;
}

std::string SearchReport::to_json_string() const {
  nlohmann::json doc;
  doc["best_subset"] = std::vector<std::uint32_t>(best_subset.indices().begin(),
                                                  best_subset.indices().end());
  doc["best_prompt_ids"] = best_prompt_ids;
  doc["best_objective_value"] = best_objective_value;
  doc["source"] = source;
  doc["config"] = {
      {"subset_size", config.subset_size},
      {"sets_per_iter", config.sets_per_iter},
      {"iterations", config.iterations},
      {"keep_sets", config.keep_sets},
      {"keep_prompts", config.keep_prompts},
      {"objective", config.objective.name()},
      {"seed", config.seed},
  };
  doc["train_models"] = train_models;
  doc["test_models"] = test_models;
  doc["train_kd"] = train_kd;
  doc["test_kd"] = test_kd ? nlohmann::json(*test_kd) : nlohmann::json();
  doc["train_estimation_error"] = train_estimation_error;
  doc["test_estimation_error"] = test_estimation_error
                                     ? nlohmann::json(*test_estimation_error)
                                     : nlohmann::json();
  nlohmann::json traces_json = nlohmann::json::array();
  for (const auto& t : traces) {
    nlohmann::json tj = {
        {"iteration", t.iteration},
        {"population_size_before", t.population_size_before},
        {"population_size_after", t.population_size_after},
        {"best_kd", t.best_kd},
        {"mean_kd_selected", t.mean_kd_selected},
        {"top_set_count", t.top_set_count},
    };
    tj["mean_kd_filtered"] = t.mean_kd_filtered
                                 ? nlohmann::json(*t.mean_kd_filtered)
                                 : nlohmann::json();
    traces_json.push_back(std::move(tj));
  }
  doc["traces"] = std::move(traces_json);
  return doc.dump(2);
}

}  // namespace flasheval
