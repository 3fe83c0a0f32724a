#pragma once

#include <cstdint>
#include <vector>

#include "flasheval/rng.hpp"
#include "flasheval/types.hpp"

namespace flasheval {

// Generator model: S_ij = mu_j + a_i * q_j + b_i + eps_ij with
// q_j = mu_j - mean(mu). Informative prompts draw an amplification
// a_i = prompt_effect_scale * U(0.5, 1.5) > 0 so their rows follow the
// planted quality more steeply; all other prompts have a_i = 0. b_i is a
// per-prompt offset N(0, prompt_effect_scale), eps is N(0, noise_scale)
// cell noise. Column means therefore follow a strictly increasing affine
// map of mu, preserving the planted model order.
struct SyntheticSpec {
  std::size_t n_prompts = 0;
  std::size_t n_models = 0;
  std::vector<double> model_quality;  // per column; empty -> shuffled ladder
  double prompt_effect_scale = 1.0;
  double noise_scale = 1.0;
  double informative_fraction = 0.3;
  std::size_t adversarial_prompts = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticTruth {
  std::vector<int> model_order;       // columns best -> worst
  std::vector<double> model_quality;  // planted mu per column
  std::vector<std::uint32_t> informative_prompts;
  std::vector<std::uint32_t> adversarial_prompts;

  std::string to_json_string() const;
};

struct SyntheticResult {
  ScoreMatrix scores;
  SyntheticTruth truth;
};

SyntheticResult generate(const SyntheticSpec& spec);

struct PlantResult {
  ScoreMatrix scores;
  std::vector<std::uint32_t> rows;  // overwritten row indices, ascending
};

// Overwrites `count` rows with constructed rows that rank almost perfectly
// on their own (standalone KD >= 1/3, far higher for larger zoos) while
// their equal-weight mean misranks at least one adjacent pair of the
// matrix's model order. The construction is searched at generation time
// over a shrinking magnitude ladder and verified against the post-plant
// ground truth before returning; ConstructionFailed means no magnitude
// preserved the planted order while meeting both properties.
PlantResult plant_adversarial(const ScoreMatrix& scores, std::size_t count,
                              Rng& rng);

}  // namespace flasheval
