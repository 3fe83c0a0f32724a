#include "flasheval/types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "flasheval/errors.hpp"

namespace flasheval {

std::string ModelSetting::id() const {
  return variant + "|" + solver + "|" + std::to_string(steps);
}

ModelSetting ModelSetting::parse(const std::string& id) {
  const auto first = id.find('|');
  const auto second = first == std::string::npos ? std::string::npos
                                                 : id.find('|', first + 1);
  if (first == std::string::npos || second == std::string::npos ||
      id.find('|', second + 1) != std::string::npos) {
    throw ParseError("model id must be 'variant|solver|steps': " + id);
  }
  ModelSetting m;
  m.variant = id.substr(0, first);
  m.solver = id.substr(first + 1, second - first - 1);
  const char* begin = id.data() + second + 1;
  const char* end = id.data() + id.size();
  const auto [ptr, ec] = std::from_chars(begin, end, m.steps);
  if (ec != std::errc{} || ptr != end || m.steps <= 0) {
    throw ParseError("model id has no positive step count: " + id);
  }
  return m;
}

ScoreMatrix::ScoreMatrix(std::vector<std::string> prompt_ids,
                         std::vector<ModelSetting> model_ids,
                         std::vector<double> scores_row_major)
    : prompt_ids_(std::move(prompt_ids)),
      model_ids_(std::move(model_ids)),
      scores_(std::move(scores_row_major)) {
  if (prompt_ids_.empty() || model_ids_.empty()) {
    throw ValidationError("score matrix needs at least one prompt and one model");
  }
  if (scores_.size() != prompt_ids_.size() * model_ids_.size()) {
    throw ValidationError("score matrix shape mismatch: expected " +
                          std::to_string(prompt_ids_.size() * model_ids_.size()) +
                          " entries, got " + std::to_string(scores_.size()));
  }
  for (const double s : scores_) {
    if (!std::isfinite(s)) {
      throw ValidationError("score matrix contains a non-finite entry");
    }
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : prompt_ids_) {
    if (!seen.insert(id).second) {
      throw ValidationError("duplicate prompt id: " + id);
    }
  }
  seen.clear();
  for (const auto& m : model_ids_) {
    if (m.variant.find('|') != std::string::npos ||
        m.solver.find('|') != std::string::npos) {
      throw ValidationError("model variant/solver must not contain '|'");
    }
    if (m.steps <= 0) {
      throw ValidationError("model step count must be positive");
    }
    if (!seen.insert(m.id()).second) {
      throw ValidationError("duplicate model setting: " + m.id());
    }
  }
}

TieThresholds::TieThresholds(std::vector<double> per_model)
    : per_model_(std::move(per_model)) {
  for (const double t : per_model_) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw ValidationError("tie thresholds must be finite and >= 0");
    }
  }
}

TieThresholds TieThresholds::zeros(std::size_t n_models) {
  return TieThresholds(std::vector<double>(n_models, 0.0));
}

SubsetIndex::SubsetIndex(std::vector<std::uint32_t> indices,
                         std::size_t n_prompts)
    : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] >= n_prompts) {
      throw ValidationError("subset index out of range");
    }
    if (i > 0 && indices_[i] == indices_[i - 1]) {
      throw ValidationError("subset contains a duplicate index");
    }
  }
}

SubsetIndex SubsetIndex::full(std::size_t n_prompts) {
  std::vector<std::uint32_t> all(n_prompts);
  std::iota(all.begin(), all.end(), 0u);
  return SubsetIndex(std::move(all), n_prompts);
}

void validate_split(const ModelSplit& split, std::size_t n_models) {
  if (split.train.empty()) {
    throw ValidationError("model split needs a non-empty train side");
  }
  std::unordered_set<int> seen;
  for (const auto* side : {&split.train, &split.test}) {
    for (const int c : *side) {
      if (c < 0 || static_cast<std::size_t>(c) >= n_models) {
        throw ValidationError("split column index out of range");
      }
      if (!seen.insert(c).second) {
        throw ValidationError("split sides overlap or repeat a column");
      }
    }
  }
}

FeatureMatrix::FeatureMatrix(std::vector<std::string> prompt_ids,
                             std::size_t dim,
                             std::vector<double> features_row_major)
    : prompt_ids_(std::move(prompt_ids)),
      dim_(dim),
      features_(std::move(features_row_major)) {
  if (dim_ == 0) {
    throw ValidationError("feature matrix needs dim >= 1");
  }
  if (features_.size() != prompt_ids_.size() * dim_) {
    throw ValidationError("feature matrix shape mismatch");
  }
  for (const double f : features_) {
    if (!std::isfinite(f)) {
      throw ValidationError("feature matrix contains a non-finite entry");
    }
  }
}

}  // namespace flasheval
