#include "flasheval/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "flasheval/errors.hpp"
#include "flasheval/ranking.hpp"

namespace flasheval {
namespace {

std::vector<int> order_by_quality(const std::vector<double>& quality) {
  std::vector<int> order(quality.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (quality[a] != quality[b]) return quality[a] > quality[b];
    return a < b;
  });
  return order;
}

std::vector<int> all_columns(std::size_t n_models) {
  std::vector<int> cols(n_models);
  std::iota(cols.begin(), cols.end(), 0);
  return cols;
}

std::vector<double> column_means(const std::vector<double>& scores,
                                 std::size_t n, std::size_t m) {
  std::vector<double> means(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) means[j] += scores[i * m + j];
  }
  for (double& v : means) v /= static_cast<double>(n);
  return means;
}

// Kendall's tau of a single row pattern against the rank order 0..m-1
// (position 0 best), zero thresholds.
double pattern_kd(std::span<const double> row_by_position) {
  const std::size_t m = row_by_position.size();
  double concordant = 0.0, discordant = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (row_by_position[i] > row_by_position[j]) concordant += 1.0;
      else if (row_by_position[i] < row_by_position[j]) discordant += 1.0;
      // equal values never appear in the integer patterns searched below
    }
  }
  return (concordant - discordant) / (concordant + discordant);
}

// All strictly-ordered patterns over {0..4} whose standalone agreement with
// the 3-model order is exactly 1/3, i.e. exactly one misranked pair.
std::vector<std::array<double, 3>> one_third_patterns() {
  std::vector<std::array<double, 3>> out;
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; b <= 4; ++b) {
      for (int c = 0; c <= 4; ++c) {
        if (a == b || a == c || b == c) continue;
        const std::array<double, 3> row = {double(a), double(b), double(c)};
        if (std::abs(pattern_kd(row) - 1.0 / 3.0) < 1e-12) out.push_back(row);
      }
    }
  }
  return out;
}

// Exhaustive search over `count`-tuples (with repetition) of one-misrank
// integer patterns for the tuple whose equal-weight mean has the lowest
// agreement with the order. Returns one pattern per planted row, centered.
std::vector<std::vector<double>> search_trio_patterns(std::size_t count) {
  const auto patterns = one_third_patterns();
  std::vector<std::size_t> pick(count, 0);
  std::vector<std::size_t> best_pick;
  double best_union = 2.0;
  for (;;) {
    std::array<double, 3> mean = {0.0, 0.0, 0.0};
    for (const std::size_t p : pick) {
      for (std::size_t j = 0; j < 3; ++j) mean[j] += patterns[p][j];
    }
    bool has_tie = false;
    for (std::size_t i = 0; i < 3 && !has_tie; ++i) {
      for (std::size_t j = i + 1; j < 3; ++j) {
        if (mean[i] == mean[j]) has_tie = true;
      }
    }
    if (!has_tie) {
      const std::array<double, 3> m = mean;
      const double u = pattern_kd(m);
      if (u < best_union) {
        best_union = u;
        best_pick = pick;
      }
    }
    std::size_t i = count;
    while (i-- > 0) {
      if (++pick[i] < patterns.size()) break;
      pick[i] = 0;
      if (i == 0) {
        std::vector<std::vector<double>> rows;
        for (const std::size_t p : best_pick) {
          std::vector<double> row(patterns[p].begin(), patterns[p].end());
          const double mean_v = (row[0] + row[1] + row[2]) / 3.0;
          for (double& v : row) v -= mean_v;
          rows.push_back(std::move(row));
        }
        return rows;
      }
    }
  }
}

// Promotion patterns for zoos with >= 4 models: row r ranks every model in
// the true order except that the model at position promote[r] is lifted to
// the top. One lifted model costs only promote[r] of the M(M-1)/2 pairs
// standalone, but the lifts survive equal-weight averaging and drag every
// (better, lifted) pair the wrong way in the combined mean.
std::vector<std::vector<double>> promotion_patterns(std::size_t m,
                                                    std::size_t count) {
  std::vector<std::vector<double>> rows;
  const std::size_t base = (2 * (m - 1)) / 3;
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t promote = std::min(m - 1, base + r % (m - base));
    std::vector<double> row(m);
    for (std::size_t k = 0; k < m; ++k) {
      row[k] = static_cast<double>(m - 1 - k);
    }
    row[promote] = static_cast<double>(m);
    const double mean_v =
        std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(m);
    for (double& v : row) v -= mean_v;
    rows.push_back(std::move(row));
  }
  return rows;
}

struct PlantCheck {
  bool order_preserved = false;
  bool standalone_ok = false;
  bool mean_misranks_adjacent = false;

  bool ok() const {
    return order_preserved && standalone_ok && mean_misranks_adjacent;
  }
};

PlantCheck verify_plant(const ScoreMatrix& planted,
                        std::span<const std::uint32_t> rows,
                        const std::vector<int>& expected_order) {
  PlantCheck check;
  const auto cols = all_columns(planted.n_models());
  const auto gt = ground_truth_scores(planted, cols);
  check.order_preserved = order_by_quality(gt.values) == expected_order;

  const auto zeros = TieThresholds::zeros(planted.n_models());
  check.standalone_ok = true;
  for (const std::uint32_t r : rows) {
    const double kd = subset_kd(
        planted, SubsetIndex({r}, planted.n_prompts()), cols, zeros);
    if (!(kd >= 1.0 / 3.0 - 1e-12)) check.standalone_ok = false;
  }

  std::vector<double> mean(planted.n_models(), 0.0);
  for (const std::uint32_t r : rows) {
    const auto row = planted.row(r);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += row[j];
  }
  for (std::size_t k = 0; k + 1 < expected_order.size(); ++k) {
    const int better = expected_order[k];
    const int worse = expected_order[k + 1];
    if (mean[static_cast<std::size_t>(better)] <
        mean[static_cast<std::size_t>(worse)]) {
      check.mean_misranks_adjacent = true;
    }
  }
  return check;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_prompts < 1 || n_models < 1) {
    throw SpecError("generator needs at least one prompt and one model");
  }
  if (!model_quality.empty() && model_quality.size() != n_models) {
    throw SpecError("model_quality must have one entry per model");
  }
  if (prompt_effect_scale < 0.0 || noise_scale < 0.0) {
    throw SpecError("scales must be >= 0");
  }
  if (informative_fraction < 0.0 || informative_fraction > 1.0) {
    throw SpecError("informative_fraction must be in [0, 1]");
  }
  if (adversarial_prompts > n_prompts) {
    throw SpecError("more adversarial prompts than prompts");
  }
}

SyntheticResult generate(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t n = spec.n_prompts;
  const std::size_t m = spec.n_models;

  std::vector<double> quality = spec.model_quality;
  if (quality.empty()) {
    quality.resize(m);
    std::iota(quality.begin(), quality.end(), 0.0);
    rng.shuffle(quality);
  }
  const double mean_quality =
      std::accumulate(quality.begin(), quality.end(), 0.0) /
      static_cast<double>(m);

  const auto n_informative = static_cast<std::size_t>(
      std::llround(spec.informative_fraction * static_cast<double>(n)));
  const auto informative = rng.sample_sorted(n, n_informative);
  std::vector<bool> is_informative(n, false);
  for (const auto i : informative) is_informative[i] = true;

  std::vector<double> scores(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double a =
        is_informative[i] ? spec.prompt_effect_scale * rng.uniform(0.5, 1.5)
                          : 0.0;
    const double b = spec.prompt_effect_scale * rng.normal();
    for (std::size_t j = 0; j < m; ++j) {
      const double signal = quality[j] + a * (quality[j] - mean_quality);
      scores[i * m + j] = signal + b + spec.noise_scale * rng.normal();
    }
  }

  std::vector<std::string> prompt_ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    prompt_ids[i] = "p" + std::to_string(i);
  }
  std::vector<ModelSetting> model_ids(m);
  for (std::size_t j = 0; j < m; ++j) {
    model_ids[j] = {"synth-v" + std::to_string(j), "solver", 10};
  }

  SyntheticResult result{
      ScoreMatrix(std::move(prompt_ids), std::move(model_ids),
                  std::move(scores)),
      SyntheticTruth{}};
  result.truth.model_quality = quality;
  result.truth.model_order = order_by_quality(quality);
  result.truth.informative_prompts.assign(informative.begin(),
                                          informative.end());

  if (spec.adversarial_prompts > 0) {
    auto planted = plant_adversarial(result.scores, spec.adversarial_prompts,
                                     rng);
    result.scores = std::move(planted.scores);
    result.truth.adversarial_prompts = std::move(planted.rows);
  }
  return result;
}

PlantResult plant_adversarial(const ScoreMatrix& scores, std::size_t count,
                              Rng& rng) {
  if (count == 0) {
    return {scores, {}};
  }
  if (count > scores.n_prompts()) {
    throw SizeError("more adversarial rows than prompts");
  }
  const std::size_t m = scores.n_models();
  if (m < 3) {
    throw ConstructionFailed(
        "adversarial rows need a zoo of at least 3 models");
  }

  const auto cols = all_columns(m);
  const auto gt = ground_truth_scores(scores, cols);
  const auto order = order_by_quality(gt.values);
  const double spread =
      *std::max_element(gt.values.begin(), gt.values.end()) -
      *std::min_element(gt.values.begin(), gt.values.end());
  const double unit = spread > 0.0 ? spread : 1.0;

  const auto rows_by_position =
      m == 3 ? search_trio_patterns(count) : promotion_patterns(m, count);

  auto target_rows = rng.sample_sorted(scores.n_prompts(), count);

  // Larger magnitudes poison subset means harder but distort the ground
  // truth more; walk the ladder down until the planted order survives.
  for (const double scale : {32.0, 16.0, 8.0, 4.0, 2.0, 1.0, 0.5}) {
    std::vector<double> values = scores.raw_scores();
    for (std::size_t r = 0; r < count; ++r) {
      for (std::size_t k = 0; k < m; ++k) {
        const auto col = static_cast<std::size_t>(order[k]);
        values[target_rows[r] * m + col] =
            rows_by_position[r][k] * unit * scale;
      }
    }
    ScoreMatrix planted(scores.prompt_ids(), scores.model_ids(),
                        std::move(values));
    const auto check = verify_plant(planted, target_rows, order);
    if (check.ok()) {
      return {std::move(planted),
              std::vector<std::uint32_t>(target_rows.begin(),
                                         target_rows.end())};
    }
  }
  throw ConstructionFailed(
      "no magnitude preserved the model order while misranking the mean");
}

std::string SyntheticTruth::to_json_string() const {
  nlohmann::json doc;
  doc["model_order"] = model_order;
  doc["model_quality"] = model_quality;
  doc["informative_prompts"] = informative_prompts;
  doc["adversarial_prompts"] = adversarial_prompts;
  return doc.dump(2);
}

}  // namespace flasheval
