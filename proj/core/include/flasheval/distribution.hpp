#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flasheval/rng.hpp"
#include "flasheval/types.hpp"

namespace flasheval {

// Moment fit of a point cloud. The covariance uses denominator n and carries
// the ridge eps = max(1e-6 * trace/dim, 1e-12) on its diagonal so that it
// stays invertible for subsets smaller than the dimension.
struct GaussianFit {
  std::vector<double> mean;        // dim entries
  std::vector<double> covariance;  // dim x dim, row-major, ridge included

  std::size_t dim() const { return mean.size(); }
};

inline constexpr double kCovarianceRidgeScale = 1e-6;
inline constexpr double kCovarianceRidgeFloor = 1e-12;

// Sample mean and covariance of the selected feature rows (>= 2 required).
GaussianFit fit_gaussian(const FeatureMatrix& features,
                         std::span<const std::uint32_t> rows);
GaussianFit fit_gaussian(const FeatureMatrix& features);

// Closed-form KL(a || b) for multivariate normals:
//   0.5 (tr(Sb^-1 Sa) + (mb-ma)^T Sb^-1 (mb-ma) - d + ln det Sb - ln det Sa)
double kl_gaussian(const GaussianFit& a, const GaussianFit& b);

// KL against one fixed reference; factors the reference's inverse and
// log-determinant out of the per-candidate cost.
class KlToReference {
 public:
  explicit KlToReference(const GaussianFit& reference);
  double operator()(const GaussianFit& a) const;

 private:
  std::size_t dim_;
  std::vector<double> ref_mean_;
  std::vector<double> ref_inverse_;  // dim x dim, row-major
  double ref_log_det_;
};

struct ClusterAssignment {
  std::size_t k = 0;
  std::vector<std::uint32_t> labels;  // per prompt, in [0, k)
  std::vector<double> centroids;      // k x dim, row-major
  std::vector<double> wcss_trace;     // within-cluster sum of squares per pass

  double wcss() const { return wcss_trace.empty() ? 0.0 : wcss_trace.back(); }
  std::span<const double> centroid(std::size_t c, std::size_t dim) const {
    return {centroids.data() + c * dim, dim};
  }
};

// Lloyd iteration with greedy farthest-point seeding from the stream.
// Throws DegenerateData when the input has fewer distinct rows than k.
ClusterAssignment kmeans(const FeatureMatrix& features, std::size_t k,
                         Rng& rng, std::size_t max_iters = 100);

struct GmmComponent {
  double weight = 0.0;
  GaussianFit gaussian;
};

struct GmmFit {
  std::vector<GmmComponent> components;
  std::vector<double> log_likelihood_trace;  // one entry per EM iteration

  std::size_t k() const { return components.size(); }
};

// EM with k-means initialization. Components whose responsibility mass
// collapses are reseeded at the worst-covered point. Stops when the relative
// log-likelihood improvement falls below tol.
GmmFit fit_gmm(const FeatureMatrix& features, std::size_t k, Rng& rng,
               std::size_t max_iters = 200, double tol = 1e-6);

// Hard assignment of every row to its maximum-responsibility component.
std::vector<std::uint32_t> gmm_hard_labels(const GmmFit& gmm,
                                           const FeatureMatrix& features);

}  // namespace flasheval
