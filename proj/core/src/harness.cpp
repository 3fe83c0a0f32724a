#include "flasheval/harness.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "flasheval/errors.hpp"
#include "flasheval/objectives.hpp"

namespace flasheval {
namespace {

using nlohmann::json;

std::vector<int> sorted_columns(std::vector<int> columns) {
  std::sort(columns.begin(), columns.end());
  return columns;
}

}  // namespace

SplitSpec SplitSpec::parse_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid split JSON: ") + e.what());
  }
  SplitSpec spec;
  const std::string kind = doc.value("kind", "");
  if (kind == "random") {
    spec.kind = SplitKind::random;
  } else if (kind == "across_variants") {
    spec.kind = SplitKind::across_variants;
    spec.train_variants =
        doc.at("train_variants").get<std::vector<std::string>>();
  } else if (kind == "across_schedules") {
    spec.kind = SplitKind::across_schedules;
    for (const auto& entry : doc.at("train_schedules")) {
      spec.train_schedules.emplace_back(entry.at(0).get<std::string>(),
                                        entry.at(1).get<int>());
    }
  } else if (kind == "explicit") {
    spec.kind = SplitKind::explicit_;
    spec.train_columns = doc.at("train").get<std::vector<int>>();
    spec.test_columns = doc.at("test").get<std::vector<int>>();
  } else {
    throw ParseError("split kind must be random, across_variants, "
                     "across_schedules or explicit");
  }
  return spec;
}

std::string SplitSpec::label() const {
  switch (kind) {
    case SplitKind::random: return "random";
    case SplitKind::across_variants: return "across_variants";
    case SplitKind::across_schedules: return "across_schedules";
    case SplitKind::explicit_: return "explicit";
  }
  return "unknown";
}

ModelSplit make_split(const std::vector<ModelSetting>& zoo,
                      const SplitSpec& spec, Rng& rng) {
  const std::size_t m = zoo.size();
  ModelSplit split;
  switch (spec.kind) {
    case SplitKind::random: {
      std::vector<int> columns(m);
      std::iota(columns.begin(), columns.end(), 0);
      rng.shuffle(columns);
      const std::size_t train_size = (m + 1) / 2;
      split.train.assign(columns.begin(),
                         columns.begin() + static_cast<std::ptrdiff_t>(train_size));
      split.test.assign(columns.begin() + static_cast<std::ptrdiff_t>(train_size),
                        columns.end());
      split.train = sorted_columns(std::move(split.train));
      split.test = sorted_columns(std::move(split.test));
      break;
    }
    case SplitKind::across_variants: {
      std::set<std::string> wanted(spec.train_variants.begin(),
                                   spec.train_variants.end());
      std::set<std::string> seen;
      for (std::size_t j = 0; j < m; ++j) {
        if (wanted.count(zoo[j].variant)) {
          split.train.push_back(static_cast<int>(j));
          seen.insert(zoo[j].variant);
        } else {
          split.test.push_back(static_cast<int>(j));
        }
      }
      for (const auto& v : wanted) {
        if (!seen.count(v)) {
          throw UnknownModel("variant not present in the zoo: " + v);
        }
      }
      break;
    }
    case SplitKind::across_schedules: {
      std::set<std::pair<std::string, int>> wanted(spec.train_schedules.begin(),
                                                   spec.train_schedules.end());
      std::set<std::pair<std::string, int>> seen;
      for (std::size_t j = 0; j < m; ++j) {
        const std::pair<std::string, int> key{zoo[j].solver, zoo[j].steps};
        if (wanted.count(key)) {
          split.train.push_back(static_cast<int>(j));
          seen.insert(key);
        } else {
          split.test.push_back(static_cast<int>(j));
        }
      }
      for (const auto& s : wanted) {
        if (!seen.count(s)) {
          throw UnknownModel("schedule not present in the zoo: " + s.first +
                             "-" + std::to_string(s.second));
        }
      }
      break;
    }
    case SplitKind::explicit_: {
      split.train = sorted_columns(spec.train_columns);
      split.test = sorted_columns(spec.test_columns);
      break;
    }
  }
  if (split.train.empty() || split.test.empty()) {
    throw EmptySide("both split sides must be non-empty");
  }
  validate_split(split, m);
  return split;
}

GeneralizationReport evaluate_generalization(const ScoreMatrix& scores,
                                             const SubsetIndex& subset,
                                             const ModelSplit& split,
                                             const TieThresholds& thresholds) {
  if (subset.empty()) {
    throw EmptySelection("subset is empty");
  }
  validate_split(split, scores.n_models());
  GeneralizationReport report;
  const auto eval_side = [&](const std::vector<int>& models, double& kd,
                             double& mse, bool& degenerate) {
    const auto gt = ground_truth_scores(scores, models);
    const auto approx = subset_scores(scores, subset, models);
    const auto t = restrict_thresholds(thresholds, models);
    const auto tau = kendall_tau_detailed(gt.values, approx.values, t);
    kd = tau.value;
    degenerate = tau.degenerate;
    double acc = 0.0;
    for (std::size_t k = 0; k < gt.size(); ++k) {
      const double d = gt[k] - approx[k];
      acc += d * d;
    }
    mse = acc / static_cast<double>(gt.size());
  };
  eval_side(split.train, report.train_kd, report.train_mse,
            report.train_degenerate);
  eval_side(split.test, report.test_kd, report.test_mse,
            report.test_degenerate);
  return report;
}

TopKReport topk_diagnostics(const ModelScoreVector& gt,
                            const ModelScoreVector& approx,
                            std::span<const double> thresholds,
                            std::size_t k) {
  const std::size_t m = gt.size();
  if (approx.size() != m || thresholds.size() != m) {
    throw LengthMismatch("score vectors and thresholds must share a length");
  }
  if (k < 1 || k > m) {
    throw ValidationError("k must be in [1, M]");
  }
  const auto top_of = [&](const std::vector<double>& values) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (values[a] != values[b]) return values[a] > values[b];
      return a < b;
    });
    order.resize(k);
    return order;
  };
  const auto true_top = top_of(gt.values);
  const auto predicted_top = top_of(approx.values);

  TopKReport report;
  report.k = k;
  const std::set<std::size_t> predicted(predicted_top.begin(),
                                        predicted_top.end());
  std::size_t hits = 0;
  for (const std::size_t c : true_top) hits += predicted.count(c);
  report.topk_proportion = static_cast<double>(hits) / static_cast<double>(k);

  if (k == 1) {
    report.topk_ranking_kd = 0.0;  // a single model has no pairs to rank
    return report;
  }
  std::vector<double> gt_top, approx_top, t_top;
  for (const std::size_t c : true_top) {
    gt_top.push_back(gt.values[c]);
    approx_top.push_back(approx.values[c]);
    t_top.push_back(thresholds[c]);
  }
  report.topk_ranking_kd = kendall_tau(gt_top, approx_top, t_top);
  return report;
}

std::optional<int> saturation_point(
    std::span<const std::pair<int, double>> scores_by_step, double epsilon,
    std::size_t window) {
  if (window < 2) {
    throw ValidationError("window must be >= 2");
  }
  for (std::size_t i = 1; i < scores_by_step.size(); ++i) {
    if (scores_by_step[i].first <= scores_by_step[i - 1].first) {
      throw ValidationError("steps must be strictly increasing");
    }
  }
  if (scores_by_step.size() < window) return std::nullopt;
  for (std::size_t start = 0; start + window <= scores_by_step.size();
       ++start) {
    bool flat = true;
    for (std::size_t a = start; a < start + window && flat; ++a) {
      for (std::size_t b = a + 1; b < start + window; ++b) {
        if (std::abs(scores_by_step[a].second - scores_by_step[b].second) >=
            epsilon) {
          flat = false;
          break;
        }
      }
    }
    if (flat) return scores_by_step[start].first;
  }
  return std::nullopt;
}

ProxySearchResult neval_proxy_search(const ScoreMatrix& scores,
                                     std::size_t n_eval,
                                     const SearchConfig& config,
                                     const ModelSplit& split,
                                     const TieThresholds& thresholds, Rng& rng,
                                     int threads) {
  const std::size_t n = scores.n_prompts();
  if (n_eval <= config.subset_size || n_eval > n) {
    throw SizeError("n_eval must be in (subset_size, n_prompts]");
  }
  validate_split(split, scores.n_models());

  const auto pool = rng.sample_sorted(n, n_eval);

  // Restrict the matrix to the pool; the search sees only these rows, so the
  // pool means act as its ground truth.
  std::vector<std::string> pool_ids;
  std::vector<double> pool_scores;
  pool_ids.reserve(n_eval);
  pool_scores.reserve(n_eval * scores.n_models());
  for (const std::uint32_t i : pool) {
    pool_ids.push_back(scores.prompt_ids()[i]);
    const auto row = scores.row(i);
    pool_scores.insert(pool_scores.end(), row.begin(), row.end());
  }
  const ScoreMatrix proxy(std::move(pool_ids), scores.model_ids(),
                          std::move(pool_scores));

  ProxySearchResult result;
  result.report =
      flasheval_search(proxy, split.train, thresholds, config, threads);
  result.rows_touched = pool.size();
  result.rows_touched_vanilla = n;

  // Map pool-local rows back into full-matrix indices.
  std::vector<std::uint32_t> mapped;
  mapped.reserve(result.report.best_subset.size());
  for (const std::uint32_t local : result.report.best_subset.indices()) {
    mapped.push_back(pool[local]);
  }
  result.report.best_subset = SubsetIndex(std::move(mapped), n);

  result.fidelity = subset_kd(scores, result.report.best_subset, split.test,
                              thresholds);
  result.report.test_models = split.test;
  result.report.test_kd = result.fidelity;
  result.report.test_estimation_error =
      estimation_error(scores, result.report.best_subset, split.test);
  return result;
}

}  // namespace flasheval
