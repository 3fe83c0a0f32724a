#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace flasheval {

// One column of a score matrix: a concrete model configuration of the zoo.
struct ModelSetting {
  std::string variant;
  std::string solver;
  int steps = 0;

  // Canonical encoding "variant|solver|steps" used in CSV headers.
  std::string id() const;
  static ModelSetting parse(const std::string& id);

  friend bool operator==(const ModelSetting&, const ModelSetting&) = default;
};

// Dense prompt x model matrix of metric scores, row = prompt. Entries are
// validated finite at construction and the matrix is immutable afterwards,
// so instances can be shared freely across threads.
class ScoreMatrix {
 public:
  ScoreMatrix(std::vector<std::string> prompt_ids,
              std::vector<ModelSetting> model_ids,
              std::vector<double> scores_row_major);

  std::size_t n_prompts() const { return prompt_ids_.size(); }
  std::size_t n_models() const { return model_ids_.size(); }

  double at(std::size_t prompt, std::size_t model) const {
    return scores_[prompt * model_ids_.size() + model];
  }
  std::span<const double> row(std::size_t prompt) const {
    return {scores_.data() + prompt * model_ids_.size(), model_ids_.size()};
  }

  const std::vector<std::string>& prompt_ids() const { return prompt_ids_; }
  const std::vector<ModelSetting>& model_ids() const { return model_ids_; }
  const std::vector<double>& raw_scores() const { return scores_; }

 private:
  std::vector<std::string> prompt_ids_;
  std::vector<ModelSetting> model_ids_;
  std::vector<double> scores_;
};

// Per-model score gap below which two model scores count as equivalent when
// classifying pairs. Entry 0 means exact-equality ties only.
class TieThresholds {
 public:
  TieThresholds() = default;
  explicit TieThresholds(std::vector<double> per_model);

  static TieThresholds zeros(std::size_t n_models);

  std::size_t size() const { return per_model_.size(); }
  double operator[](std::size_t model) const { return per_model_[model]; }
  const std::vector<double>& per_model() const { return per_model_; }

 private:
  std::vector<double> per_model_;
};

// A fixed set of prompt row indices, stored strictly increasing.
class SubsetIndex {
 public:
  SubsetIndex() = default;
  // Sorts the given indices; throws ValidationError on duplicates or
  // out-of-range entries.
  SubsetIndex(std::vector<std::uint32_t> indices, std::size_t n_prompts);

  static SubsetIndex full(std::size_t n_prompts);

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  std::span<const std::uint32_t> indices() const { return indices_; }
  std::uint32_t operator[](std::size_t i) const { return indices_[i]; }

  friend bool operator==(const SubsetIndex&, const SubsetIndex&) = default;

 private:
  std::vector<std::uint32_t> indices_;
};

// Disjoint train/test column index lists over a model zoo.
struct ModelSplit {
  std::vector<int> train;
  std::vector<int> test;
};

// Throws ValidationError unless train is non-empty, both sides are sorted
// sets of in-range columns, and the sides are disjoint.
void validate_split(const ModelSplit& split, std::size_t n_models);

// Dense per-prompt embedding matrix, row = prompt.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<std::string> prompt_ids, std::size_t dim,
                std::vector<double> features_row_major);

  std::size_t n_prompts() const { return prompt_ids_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const double> row(std::size_t prompt) const {
    return {features_.data() + prompt * dim_, dim_};
  }
  const std::vector<std::string>& prompt_ids() const { return prompt_ids_; }
  const std::vector<double>& raw_features() const { return features_; }

 private:
  std::vector<std::string> prompt_ids_;
  std::size_t dim_ = 0;
  std::vector<double> features_;
};

}  // namespace flasheval
