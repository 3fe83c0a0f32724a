#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flasheval/distribution.hpp"
#include "flasheval/objectives.hpp"
#include "flasheval/rng.hpp"
#include "flasheval/types.hpp"

namespace flasheval {

// Uniform without-replacement sample of subset_size prompt indices.
SubsetIndex random_subset(std::size_t n_prompts, std::size_t subset_size,
                          Rng& rng);

struct RsBaselineResult {
  double mean_kd = 0.0;
  double std_error = 0.0;           // sample stddev / sqrt(repeats)
  std::vector<double> kd_values;    // one entry per repeat
};

// Random-sampling baseline: mean and standard error of subset_kd over
// n_repeats independent draws of the given size.
RsBaselineResult rs_baseline(const ScoreMatrix& scores,
                             std::span<const int> models,
                             const TieThresholds& thresholds,
                             std::size_t subset_size, std::size_t n_repeats,
                             Rng& rng);

// Rank agreement of the singleton subset {prompt_index}.
double prompt_standalone_kd(const ScoreMatrix& scores,
                            std::uint32_t prompt_index,
                            std::span<const int> models,
                            const TieThresholds& thresholds);

// Prompt-wise search: the subset_size prompts with the highest standalone
// rank agreement, ties broken toward the lower index.
SubsetIndex b3_prompt(const ScoreMatrix& scores, std::span<const int> models,
                      const TieThresholds& thresholds,
                      std::size_t subset_size);

struct BestSubsetResult {
  SubsetIndex subset;
  double kd = 0.0;
};

// Set-wise random search: the best-KD subset among n_samples candidates,
// first seen wins on ties. When n_samples covers the whole C(n, size) space
// the candidates are enumerated exhaustively instead of sampled, so the
// result is the global optimum.
BestSubsetResult b3_set(const ScoreMatrix& scores, std::span<const int> models,
                        const TieThresholds& thresholds,
                        std::size_t subset_size, std::uint64_t n_samples,
                        Rng& rng);

enum class ClusterSelectMode { near, far, random };

ClusterSelectMode parse_cluster_mode(const std::string& name);

// Per-cluster quota selection: subset_size/k prompts from each cluster by
// distance to the centroid (near or far) or uniformly at random. When
// subset_size is not divisible by k the first subset_size mod k clusters
// take one extra element.
SubsetIndex cluster_select(const FeatureMatrix& features,
                           const ClusterAssignment& clusters,
                           ClusterSelectMode mode, std::size_t subset_size,
                           Rng& rng);

// Greedy distribution matching: starts from one random prompt and repeatedly
// adds the prompt minimizing KL(fit(subset + p) || fit(pool)), where the
// pool is the optional population restriction (default: every prompt).
SubsetIndex greedy_kl_search(const FeatureMatrix& features,
                             std::size_t subset_size, Rng& rng,
                             std::span<const std::uint32_t> population = {});

// Runs the greedy KL search inside each mixture component over the prompts
// hard-assigned to it, with the same remainder rule as cluster_select.
SubsetIndex gmm_partition_search(const FeatureMatrix& features,
                                 const GmmFit& gmm, std::size_t subset_size,
                                 Rng& rng);

// First `total % bins` bins take one extra element; sums to total.
std::vector<std::size_t> split_quota(std::size_t total, std::size_t bins);

// min(C(n, k), cap), computed exactly below the cap.
std::uint64_t binomial_capped(std::size_t n, std::size_t k,
                              std::uint64_t cap);

}  // namespace flasheval
