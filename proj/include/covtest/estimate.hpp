#pragma once

#include <string>
#include <vector>

#include "covtest/matview.hpp"

namespace covtest {

/// One group's observations, one row per observation vector.
class GroupSample {
 public:
  GroupSample() = default;
  /// Throws Error{NonFinite} on NaN/inf entries and Error{BadDimension} when
  /// there are no columns.
  GroupSample(std::string id, Matrix observations);

  const std::string& id() const noexcept { return id_; }
  const Matrix& observations() const noexcept { return x_; }
  Index size() const noexcept { return x_.rows(); }
  Index dim() const noexcept { return x_.cols(); }

 private:
  std::string id_;
  Matrix x_;
};

struct EmpiricalCov {
  SymMatrix cov;
  VechVector vech;
};

/// Unbiased covariance (n - 1 denominator) and its vech.
EmpiricalCov empirical_cov(const GroupSample& g);

/// Columns k = vech(Xt_k Xt_k^T) - mean_l vech(Xt_l Xt_l^T), with Xt the
/// group-centered observations. p x n.
Matrix centered_products(const GroupSample& g);

/// Covariance of the vech'd cross products, (n - 1)^{-1} sum_k D_k D_k^T with
/// D = centered_products(g). p x p, symmetric, PSD.
SymMatrix fourth_moment_cov(const GroupSample& g);

struct GroupEstimate {
  Index n = 0;
  SymMatrix cov;             // V-hat_i
  VechVector cov_vech;       // v-hat_i
  SymMatrix fourth_moment;   // Sigma-hat_i
  Matrix products;           // centered_products, p x n
};

/// Per-group estimates plus pooled quantities. The pooled Sigma-hat is the
/// direct sum of (N / n_i) * Sigma-hat_i.
struct CovEstimate {
  std::vector<GroupEstimate> groups;
  Index total_n = 0;
  Index dim = 0;

  Index group_count() const noexcept { return static_cast<Index>(groups.size()); }
  Index vech_dim() const noexcept { return vech_length(dim); }
  double weight(std::size_t i) const {
    return static_cast<double>(total_n) / static_cast<double>(groups[i].n);
  }
  double kappa(std::size_t i) const { return 1.0 / weight(i); }
  /// Stacked (v-hat_1, ..., v-hat_a), length a * p.
  Vector stacked_vech() const;
  /// Block-diagonal (a p) x (a p) matrix.
  Matrix pooled_sigma() const;
};

/// Throws Error{EmptyList} for no groups, Error{DimensionMismatch} when groups
/// disagree on d, Error{TooFewObservations} if some n_i < 2.
CovEstimate pooled_estimates(const std::vector<GroupSample>& samples);

}  // namespace covtest
