#include "flasheval/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flasheval/errors.hpp"

namespace flasheval {
namespace {

void check_subset_size(std::size_t subset_size, std::size_t n) {
  if (subset_size < 1 || subset_size > n) {
    throw SizeError("subset size must be in [1, n_prompts]");
  }
}

std::vector<std::uint32_t> members_of(std::span<const std::uint32_t> labels,
                                      std::uint32_t cluster) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == cluster) out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

double dist2_to(const FeatureMatrix& features, std::uint32_t row,
                std::span<const double> center) {
  const auto x = features.row(row);
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - center[j];
    acc += d * d;
  }
  return acc;
}

// Greedy KL step sequence over a fixed pool; quota >= 1. The first element
// is random, every later one is the exhaustive argmin over remaining pool
// members of KL(fit(chosen + candidate) || fit(pool)).
std::vector<std::uint32_t> greedy_kl_rows(
    const FeatureMatrix& features, std::size_t quota, Rng& rng,
    std::span<const std::uint32_t> population) {
  const std::size_t pool_size = population.size();
  if (quota > pool_size) {
    throw SizeError("greedy KL quota exceeds population size");
  }
  std::vector<std::uint32_t> chosen;
  chosen.reserve(quota);
  std::vector<bool> used(pool_size, false);

  const std::size_t first = rng.uniform_index(pool_size);
  chosen.push_back(population[first]);
  used[first] = true;
  if (quota == 1) return chosen;

  const KlToReference kl_to_pool(fit_gaussian(features, population));

  std::vector<std::uint32_t> candidate_rows;
  while (chosen.size() < quota) {
    double best_kl = std::numeric_limits<double>::infinity();
    std::size_t best_pos = pool_size;
    for (std::size_t p = 0; p < pool_size; ++p) {
      if (used[p]) continue;
      candidate_rows = chosen;
      candidate_rows.push_back(population[p]);
      const double d = kl_to_pool(fit_gaussian(features, candidate_rows));
      if (d < best_kl) {
        best_kl = d;
        best_pos = p;
      }
    }
    chosen.push_back(population[best_pos]);
    used[best_pos] = true;
  }
  return chosen;
}

}  // namespace

SubsetIndex random_subset(std::size_t n_prompts, std::size_t subset_size,
                          Rng& rng) {
  check_subset_size(subset_size, n_prompts);
  return SubsetIndex(rng.sample_sorted(n_prompts, subset_size), n_prompts);
}

RsBaselineResult rs_baseline(const ScoreMatrix& scores,
                             std::span<const int> models,
                             const TieThresholds& thresholds,
                             std::size_t subset_size, std::size_t n_repeats,
                             Rng& rng) {
  if (n_repeats < 2) {
    throw SizeError("standard errors need at least 2 repeats");
  }
  check_subset_size(subset_size, scores.n_prompts());
  const SubsetEvaluator evaluator(scores, models, thresholds);

  detail::SampleScratch scratch;
  scratch.reset(scores.n_prompts());
  std::vector<std::uint32_t> rows;

  RsBaselineResult result;
  result.kd_values.reserve(n_repeats);
  for (std::size_t r = 0; r < n_repeats; ++r) {
    detail::sample_positions(scratch, subset_size, rng, rows);
    result.kd_values.push_back(evaluator.subset_kd(rows));
  }
  double mean = 0.0;
  for (const double v : result.kd_values) mean += v;
  mean /= static_cast<double>(n_repeats);
  double var = 0.0;
  for (const double v : result.kd_values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n_repeats - 1);
  result.mean_kd = mean;
  result.std_error = std::sqrt(var / static_cast<double>(n_repeats));
  return result;
}

double prompt_standalone_kd(const ScoreMatrix& scores,
                            std::uint32_t prompt_index,
                            std::span<const int> models,
                            const TieThresholds& thresholds) {
  return subset_kd(scores, SubsetIndex({prompt_index}, scores.n_prompts()),
                   models, thresholds);
}

SubsetIndex b3_prompt(const ScoreMatrix& scores, std::span<const int> models,
                      const TieThresholds& thresholds,
                      std::size_t subset_size) {
  check_subset_size(subset_size, scores.n_prompts());
  const SubsetEvaluator evaluator(scores, models, thresholds);
  std::vector<std::pair<double, std::uint32_t>> ranked;
  ranked.reserve(scores.n_prompts());
  for (std::uint32_t i = 0; i < scores.n_prompts(); ++i) {
    const std::uint32_t row[1] = {i};
    ranked.emplace_back(evaluator.subset_kd(row), i);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::uint32_t> top(subset_size);
  for (std::size_t i = 0; i < subset_size; ++i) top[i] = ranked[i].second;
  return SubsetIndex(std::move(top), scores.n_prompts());
}

std::uint64_t binomial_capped(std::size_t n, std::size_t k,
                              std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > cap) return cap;
  }
  return static_cast<std::uint64_t>(c);
}

BestSubsetResult b3_set(const ScoreMatrix& scores, std::span<const int> models,
                        const TieThresholds& thresholds,
                        std::size_t subset_size, std::uint64_t n_samples,
                        Rng& rng) {
  if (n_samples < 1) {
    throw SizeError("set-wise search needs at least 1 sample");
  }
  const std::size_t n = scores.n_prompts();
  check_subset_size(subset_size, n);
  const SubsetEvaluator evaluator(scores, models, thresholds);

  double best_kd = -std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> best_rows;

  const std::uint64_t space = binomial_capped(n, subset_size, n_samples);
  if (n_samples >= space) {
    // The sampling budget covers the whole space: enumerate it instead.
    std::vector<std::uint32_t> rows(subset_size);
    std::iota(rows.begin(), rows.end(), 0u);
    for (;;) {
      const double kd = evaluator.subset_kd(rows);
      if (kd > best_kd) {
        best_kd = kd;
        best_rows = rows;
      }
      std::size_t i = subset_size - 1;
      while (rows[i] == n - subset_size + i) {
        if (i == 0) {
          return {SubsetIndex(std::move(best_rows), n), best_kd};
        }
        --i;
      }
      ++rows[i];
      for (std::size_t j = i + 1; j < subset_size; ++j) {
        rows[j] = rows[j - 1] + 1;
      }
    }
  }

  detail::SampleScratch scratch;
  scratch.reset(n);
  std::vector<std::uint32_t> rows;
  for (std::uint64_t s = 0; s < n_samples; ++s) {
    detail::sample_positions(scratch, subset_size, rng, rows);
    const double kd = evaluator.subset_kd(rows);
    if (kd > best_kd) {
      best_kd = kd;
      best_rows = rows;
    }
  }
  return {SubsetIndex(std::move(best_rows), n), best_kd};
}

ClusterSelectMode parse_cluster_mode(const std::string& name) {
  if (name == "near") return ClusterSelectMode::near;
  if (name == "far") return ClusterSelectMode::far;
  if (name == "random") return ClusterSelectMode::random;
  throw ParseError("unknown cluster mode (expected near, far or random): " +
                   name);
}

std::vector<std::size_t> split_quota(std::size_t total, std::size_t bins) {
  std::vector<std::size_t> quota(bins, total / bins);
  for (std::size_t i = 0; i < total % bins; ++i) ++quota[i];
  return quota;
}

SubsetIndex cluster_select(const FeatureMatrix& features,
                           const ClusterAssignment& clusters,
                           ClusterSelectMode mode, std::size_t subset_size,
                           Rng& rng) {
  check_subset_size(subset_size, features.n_prompts());
  const std::size_t dim = features.dim();
  const auto quota = split_quota(subset_size, clusters.k);

  std::vector<std::uint32_t> picked;
  picked.reserve(subset_size);
  for (std::size_t c = 0; c < clusters.k; ++c) {
    if (quota[c] == 0) continue;
    const auto members =
        members_of(clusters.labels, static_cast<std::uint32_t>(c));
    if (members.size() < quota[c]) {
      throw QuotaError("cluster " + std::to_string(c) + " has " +
                       std::to_string(members.size()) +
                       " prompts but a quota of " + std::to_string(quota[c]));
    }
    if (mode == ClusterSelectMode::random) {
      const auto positions = rng.sample_sorted(members.size(), quota[c]);
      for (const auto p : positions) picked.push_back(members[p]);
      continue;
    }
    const auto center = clusters.centroid(c, dim);
    std::vector<std::pair<double, std::uint32_t>> ranked;
    ranked.reserve(members.size());
    for (const auto m : members) {
      ranked.emplace_back(dist2_to(features, m, center), m);
    }
    const bool ascending = mode == ClusterSelectMode::near;
    std::sort(ranked.begin(), ranked.end(),
              [ascending](const auto& a, const auto& b) {
                if (a.first != b.first) {
                  return ascending ? a.first < b.first : a.first > b.first;
                }
                return a.second < b.second;
              });
    for (std::size_t i = 0; i < quota[c]; ++i) {
      picked.push_back(ranked[i].second);
    }
  }
  return SubsetIndex(std::move(picked), features.n_prompts());
}

SubsetIndex greedy_kl_search(const FeatureMatrix& features,
                             std::size_t subset_size, Rng& rng,
                             std::span<const std::uint32_t> population) {
  if (subset_size < 2) {
    throw SizeError("greedy KL search needs a subset size >= 2");
  }
  std::vector<std::uint32_t> pool;
  if (population.empty()) {
    pool.resize(features.n_prompts());
    std::iota(pool.begin(), pool.end(), 0u);
  } else {
    pool.assign(population.begin(), population.end());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i] >= features.n_prompts() ||
          (i > 0 && pool[i] <= pool[i - 1])) {
        throw ValidationError("population must be a sorted set of row indices");
      }
    }
  }
  auto rows = greedy_kl_rows(features, subset_size, rng, pool);
  return SubsetIndex(std::move(rows), features.n_prompts());
}

SubsetIndex gmm_partition_search(const FeatureMatrix& features,
                                 const GmmFit& gmm, std::size_t subset_size,
                                 Rng& rng) {
  check_subset_size(subset_size, features.n_prompts());
  const auto labels = gmm_hard_labels(gmm, features);
  const auto quota = split_quota(subset_size, gmm.k());

  std::vector<std::uint32_t> picked;
  picked.reserve(subset_size);
  for (std::size_t c = 0; c < gmm.k(); ++c) {
    if (quota[c] == 0) continue;
    const auto members = members_of(labels, static_cast<std::uint32_t>(c));
    if (members.size() < quota[c]) {
      throw QuotaError("component " + std::to_string(c) + " has " +
                       std::to_string(members.size()) +
                       " prompts but a quota of " + std::to_string(quota[c]));
    }
    const auto rows = greedy_kl_rows(features, quota[c], rng, members);
    picked.insert(picked.end(), rows.begin(), rows.end());
  }
  return SubsetIndex(std::move(picked), features.n_prompts());
}

}  // namespace flasheval
