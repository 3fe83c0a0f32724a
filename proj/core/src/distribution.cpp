#include "flasheval/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "flasheval/errors.hpp"

namespace flasheval {
namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ConstMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                                Eigen::Dynamic, Eigen::RowMajor>>;

double ridge_for(const Matrix& raw_cov) {
  const double trace = raw_cov.trace();
  return std::max(kCovarianceRidgeScale * trace /
                      static_cast<double>(raw_cov.rows()),
                  kCovarianceRidgeFloor);
}

Matrix cov_as_matrix(const GaussianFit& fit) {
  const auto d = static_cast<Eigen::Index>(fit.dim());
  return ConstMap(fit.covariance.data(), d, d);
}

Eigen::LLT<Matrix> cholesky_or_throw(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw SingularCovariance("covariance is not positive definite");
  }
  return llt;
}

double log_det_from_llt(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

GaussianFit moments_to_fit(const Vector& mean, const Matrix& raw_cov) {
  Matrix cov = raw_cov;
  cov.diagonal().array() += ridge_for(raw_cov);
  GaussianFit fit;
  fit.mean.assign(mean.data(), mean.data() + mean.size());
  fit.covariance.resize(static_cast<std::size_t>(cov.size()));
  for (Eigen::Index r = 0; r < cov.rows(); ++r) {
    for (Eigen::Index c = 0; c < cov.cols(); ++c) {
      fit.covariance[static_cast<std::size_t>(r * cov.cols() + c)] = cov(r, c);
    }
  }
  return fit;
}

// log N(x; mean, cov) with a prefactored Cholesky.
double log_density(const Eigen::LLT<Matrix>& llt, double log_det,
                   const Vector& mean, const Vector& x) {
  const auto d = static_cast<double>(mean.size());
  const Vector diff = x - mean;
  const double quad = diff.dot(llt.solve(diff));
  return -0.5 * (d * std::log(2.0 * M_PI) + log_det + quad);
}

Vector row_vector(const FeatureMatrix& features, std::size_t i) {
  const auto row = features.row(i);
  return Eigen::Map<const Vector>(row.data(),
                                  static_cast<Eigen::Index>(row.size()));
}

}  // namespace

GaussianFit fit_gaussian(const FeatureMatrix& features,
                         std::span<const std::uint32_t> rows) {
  if (rows.size() < 2) {
    throw TooFewPoints("moment fit needs at least 2 points");
  }
  const auto d = static_cast<Eigen::Index>(features.dim());
  Vector mean = Vector::Zero(d);
  for (const std::uint32_t i : rows) mean += row_vector(features, i);
  mean /= static_cast<double>(rows.size());
  Matrix cov = Matrix::Zero(d, d);
  for (const std::uint32_t i : rows) {
    const Vector diff = row_vector(features, i) - mean;
    cov.noalias() += diff * diff.transpose();
  }
  cov /= static_cast<double>(rows.size());
  return moments_to_fit(mean, cov);
}

GaussianFit fit_gaussian(const FeatureMatrix& features) {
  std::vector<std::uint32_t> all(features.n_prompts());
  std::iota(all.begin(), all.end(), 0u);
  return fit_gaussian(features, all);
}

double kl_gaussian(const GaussianFit& a, const GaussianFit& b) {
  if (a.dim() != b.dim()) {
    throw LengthMismatch("gaussian fits have different dimensions");
  }
  const KlToReference kl(b);
  return kl(a);
}

KlToReference::KlToReference(const GaussianFit& reference)
    : dim_(reference.dim()), ref_mean_(reference.mean) {
  const Matrix cov = cov_as_matrix(reference);
  const auto llt = cholesky_or_throw(cov);
  ref_log_det_ = log_det_from_llt(llt);
  const Matrix inv =
      llt.solve(Matrix::Identity(cov.rows(), cov.cols()));
  ref_inverse_.resize(dim_ * dim_);
  for (Eigen::Index r = 0; r < inv.rows(); ++r) {
    for (Eigen::Index c = 0; c < inv.cols(); ++c) {
      ref_inverse_[static_cast<std::size_t>(r * inv.cols() + c)] = inv(r, c);
    }
  }
}

double KlToReference::operator()(const GaussianFit& a) const {
  if (a.dim() != dim_) {
    throw LengthMismatch("gaussian fits have different dimensions");
  }
  const auto d = static_cast<Eigen::Index>(dim_);
  const ConstMap inv_b(ref_inverse_.data(), d, d);
  const ConstMap cov_a(a.covariance.data(), d, d);
  const auto llt_a = cholesky_or_throw(Matrix(cov_a));
  const double log_det_a = log_det_from_llt(llt_a);

  const double trace_term = (inv_b * cov_a).trace();
  Vector diff(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    diff(i) = ref_mean_[static_cast<std::size_t>(i)] -
              a.mean[static_cast<std::size_t>(i)];
  }
  const double quad = diff.dot(inv_b * diff);
  return 0.5 * (trace_term + quad - static_cast<double>(d) + ref_log_det_ -
                log_det_a);
}

ClusterAssignment kmeans(const FeatureMatrix& features, std::size_t k,
                         Rng& rng, std::size_t max_iters) {
  const std::size_t n = features.n_prompts();
  const std::size_t d = features.dim();
  if (k == 0 || k > n) {
    throw DegenerateData("cluster count must be in [1, n_prompts]");
  }
  {
    std::set<std::vector<double>> distinct;
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = features.row(i);
      distinct.emplace(row.begin(), row.end());
      if (distinct.size() >= k) break;
    }
    if (distinct.size() < k) {
      throw DegenerateData("fewer distinct points than clusters");
    }
  }

  const auto dist2 = [&](std::size_t i, const double* center) {
    const auto row = features.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double delta = row[j] - center[j];
      acc += delta * delta;
    }
    return acc;
  };

  // Greedy farthest-point seeding: random first centre, then repeatedly the
  // point farthest from its nearest chosen centre (ties to the lower index).
  std::vector<double> centroids(k * d);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  {
    const std::size_t first = rng.uniform_index(n);
    const auto row = features.row(first);
    std::copy(row.begin(), row.end(), centroids.begin());
    for (std::size_t i = 0; i < n; ++i) nearest[i] = dist2(i, centroids.data());
    for (std::size_t c = 1; c < k; ++c) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (nearest[i] > nearest[best]) best = i;
      }
      const auto next_row = features.row(best);
      std::copy(next_row.begin(), next_row.end(),
                centroids.begin() + static_cast<std::ptrdiff_t>(c * d));
      for (std::size_t i = 0; i < n; ++i) {
        nearest[i] = std::min(nearest[i], dist2(i, centroids.data() + c * d));
      }
    }
  }

  ClusterAssignment out;
  out.k = k;
  out.labels.assign(n, 0);
  std::vector<std::uint32_t> prev_labels;
  std::vector<std::size_t> counts(k);

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = dist2(i, centroids.data());
      for (std::size_t c = 1; c < k; ++c) {
        const double dd = dist2(i, centroids.data() + c * d);
        if (dd < best_d) {
          best_d = dd;
          best = c;
        }
      }
      out.labels[i] = static_cast<std::uint32_t>(best);
      wcss += best_d;
    }
    out.wcss_trace.push_back(wcss);
    if (out.labels == prev_labels) break;
    prev_labels = out.labels;

    std::fill(centroids.begin(), centroids.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = features.row(i);
      double* center = centroids.data() + out.labels[i] * d;
      for (std::size_t j = 0; j < d; ++j) center[j] += row[j];
      ++counts[out.labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      double* center = centroids.data() + c * d;
      for (std::size_t j = 0; j < d; ++j) {
        center[j] /= static_cast<double>(counts[c]);
      }
    }
    // An emptied cluster restarts at the point farthest from its own centre.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t farthest = 0;
      double worst = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double dd = dist2(i, centroids.data() + out.labels[i] * d);
        if (dd > worst) {
          worst = dd;
          farthest = i;
        }
      }
      const auto row = features.row(farthest);
      std::copy(row.begin(), row.end(),
                centroids.begin() + static_cast<std::ptrdiff_t>(c * d));
    }
  }

  out.centroids = std::move(centroids);
  return out;
}

GmmFit fit_gmm(const FeatureMatrix& features, std::size_t k, Rng& rng,
               std::size_t max_iters, double tol) {
  const std::size_t n = features.n_prompts();
  const auto d = static_cast<Eigen::Index>(features.dim());
  if (k == 0) {
    throw DegenerateData("component count must be >= 1");
  }

  const auto clusters = kmeans(features, k, rng);

  GmmFit gmm;
  gmm.components.resize(k);
  {
    std::vector<std::vector<std::uint32_t>> members(k);
    for (std::size_t i = 0; i < n; ++i) {
      members[clusters.labels[i]].push_back(static_cast<std::uint32_t>(i));
    }
    for (std::size_t c = 0; c < k; ++c) {
      auto& comp = gmm.components[c];
      comp.weight = static_cast<double>(members[c].size()) /
                    static_cast<double>(n);
      if (members[c].size() >= 2) {
        comp.gaussian = fit_gaussian(features, members[c]);
      } else {
        Vector mean = members[c].empty()
                          ? Vector::Zero(d)
                          : row_vector(features, members[c][0]);
        comp.gaussian = moments_to_fit(mean, Matrix::Zero(d, d));
      }
    }
  }

  const GaussianFit global = n >= 2 ? fit_gaussian(features)
                                    : gmm.components[0].gaussian;

  Eigen::MatrixXd log_resp(static_cast<Eigen::Index>(n),
                           static_cast<Eigen::Index>(k));
  std::vector<Eigen::LLT<Matrix>> llts;
  std::vector<double> log_dets(k);
  std::vector<Vector> means(k);

  double prev_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    llts.clear();
    for (std::size_t c = 0; c < k; ++c) {
      const Matrix cov = cov_as_matrix(gmm.components[c].gaussian);
      llts.push_back(cholesky_or_throw(cov));
      log_dets[c] = log_det_from_llt(llts[c]);
      means[c] = Eigen::Map<const Vector>(gmm.components[c].gaussian.mean.data(), d);
    }

    // E-step with log-sum-exp normalization.
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vector x = row_vector(features, i);
      double max_term = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double term = std::log(gmm.components[c].weight) +
                            log_density(llts[c], log_dets[c], means[c], x);
        log_resp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
            term;
        max_term = std::max(max_term, term);
      }
      double sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        sum += std::exp(log_resp(static_cast<Eigen::Index>(i),
                                 static_cast<Eigen::Index>(c)) -
                        max_term);
      }
      const double lse = max_term + std::log(sum);
      ll += lse;
      for (std::size_t c = 0; c < k; ++c) {
        log_resp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) -=
            lse;
      }
    }
    gmm.log_likelihood_trace.push_back(ll);

    // M-step.
    bool reseeded = false;
    for (std::size_t c = 0; c < k; ++c) {
      double nk = 0.0;
      Vector mean = Vector::Zero(d);
      for (std::size_t i = 0; i < n; ++i) {
        const double r = std::exp(log_resp(static_cast<Eigen::Index>(i),
                                           static_cast<Eigen::Index>(c)));
        nk += r;
        mean += r * row_vector(features, i);
      }
      if (nk < 1e-10 * static_cast<double>(n)) {
        // Collapsed component: restart at the worst-covered point.
        std::size_t worst = 0;
        double worst_ll = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
          double best = -std::numeric_limits<double>::infinity();
          for (std::size_t c2 = 0; c2 < k; ++c2) {
            best = std::max(best,
                            log_resp(static_cast<Eigen::Index>(i),
                                     static_cast<Eigen::Index>(c2)));
          }
          if (best < worst_ll) {
            worst_ll = best;
            worst = i;
          }
        }
        auto& comp = gmm.components[c];
        comp.weight = 1.0 / static_cast<double>(n);
        comp.gaussian.mean.assign(features.row(worst).begin(),
                                  features.row(worst).end());
        comp.gaussian.covariance = global.covariance;
        reseeded = true;
        continue;
      }
      mean /= nk;
      Matrix cov = Matrix::Zero(d, d);
      for (std::size_t i = 0; i < n; ++i) {
        const double r = std::exp(log_resp(static_cast<Eigen::Index>(i),
                                           static_cast<Eigen::Index>(c)));
        const Vector diff = row_vector(features, i) - mean;
        cov.noalias() += r * (diff * diff.transpose());
      }
      cov /= nk;
      auto& comp = gmm.components[c];
      comp.weight = nk / static_cast<double>(n);
      comp.gaussian = moments_to_fit(mean, cov);
    }
    {
      double total = 0.0;
      for (const auto& comp : gmm.components) total += comp.weight;
      for (auto& comp : gmm.components) comp.weight /= total;
    }

    if (!reseeded && iter > 0) {
      const double rel = (ll - prev_ll) / std::max(1.0, std::abs(prev_ll));
      if (rel < tol && ll >= prev_ll) break;
    }
    prev_ll = ll;
  }
  return gmm;
}

std::vector<std::uint32_t> gmm_hard_labels(const GmmFit& gmm,
                                           const FeatureMatrix& features) {
  const std::size_t n = features.n_prompts();
  const auto d = static_cast<Eigen::Index>(features.dim());
  std::vector<std::uint32_t> labels(n, 0);
  std::vector<Eigen::LLT<Matrix>> llts;
  std::vector<double> log_dets;
  std::vector<Vector> means;
  for (const auto& comp : gmm.components) {
    llts.push_back(cholesky_or_throw(cov_as_matrix(comp.gaussian)));
    log_dets.push_back(log_det_from_llt(llts.back()));
    means.push_back(Eigen::Map<const Vector>(comp.gaussian.mean.data(), d));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vector x = row_vector(features, i);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < gmm.k(); ++c) {
      const double term = std::log(gmm.components[c].weight) +
                          log_density(llts[c], log_dets[c], means[c], x);
      if (term > best) {
        best = term;
        best_c = c;
      }
    }
    labels[i] = static_cast<std::uint32_t>(best_c);
  }
  return labels;
}

}  // namespace flasheval
