#include "covtest/estimate.hpp"

#include "covtest/error.hpp"

namespace covtest {

namespace {

void require_two(const GroupSample& g) {
  if (g.size() < 2)
    throw Error(ErrorCode::TooFewObservations,
                "group '" + g.id() + "' has " + std::to_string(g.size()) + " observation(s); need at least 2");
}

Matrix centered(const GroupSample& g) {
  const Matrix& x = g.observations();
  Eigen::RowVectorXd mean = x.colwise().mean();
  return x.rowwise() - mean;
}

// p x n matrix of vech(Xt_k Xt_k^T), uncentered
Matrix raw_products(const Matrix& xt) {
  const Index n = xt.rows(), d = xt.cols();
  Matrix out(vech_length(d), n);
  for (Index k = 0; k < n; ++k) {
    Index j = 0;
    for (Index r = 0; r < d; ++r)
      for (Index s = r; s < d; ++s) out(j++, k) = xt(k, r) * xt(k, s);
  }
  return out;
}

}  // namespace

GroupSample::GroupSample(std::string id, Matrix observations) : id_(std::move(id)), x_(std::move(observations)) {
  if (x_.cols() == 0) throw Error(ErrorCode::BadDimension, "group '" + id_ + "' has no variables");
  if (!x_.allFinite()) throw Error(ErrorCode::NonFinite, "group '" + id_ + "' contains non-finite values");
}

EmpiricalCov empirical_cov(const GroupSample& g) {
  require_two(g);
  Matrix xt = centered(g);
  Matrix v = (xt.transpose() * xt) / static_cast<double>(g.size() - 1);
  auto cov = SymMatrix::symmetrized(v);
  auto vv = vech(cov);
  return {std::move(cov), std::move(vv)};
}

Matrix centered_products(const GroupSample& g) {
  require_two(g);
  Matrix prod = raw_products(centered(g));
  Vector mean = prod.rowwise().mean();
  prod.colwise() -= mean;
  return prod;
}

SymMatrix fourth_moment_cov(const GroupSample& g) {
  Matrix dk = centered_products(g);
  Matrix s = (dk * dk.transpose()) / static_cast<double>(g.size() - 1);
  return SymMatrix::symmetrized(s);
}

Vector CovEstimate::stacked_vech() const {
  const Index p = vech_dim();
  Vector out(p * group_count());
  for (std::size_t i = 0; i < groups.size(); ++i)
    out.segment(static_cast<Index>(i) * p, p) = groups[i].cov_vech.values();
  return out;
}

Matrix CovEstimate::pooled_sigma() const {
  std::vector<Matrix> blocks;
  blocks.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i)
    blocks.push_back(weight(i) * groups[i].fourth_moment.matrix());
  return direct_sum(blocks);
}

CovEstimate pooled_estimates(const std::vector<GroupSample>& samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyList, "no groups supplied");
  CovEstimate est;
  est.dim = samples.front().dim();
  for (const auto& g : samples) {
    if (g.dim() != est.dim)
      throw Error(ErrorCode::DimensionMismatch, "group '" + g.id() + "' has dimension " +
                                                    std::to_string(g.dim()) + ", expected " +
                                                    std::to_string(est.dim));
    require_two(g);
    GroupEstimate ge;
    ge.n = g.size();
    auto ec = empirical_cov(g);
    ge.cov = std::move(ec.cov);
    ge.cov_vech = std::move(ec.vech);
    ge.products = centered_products(g);
    ge.fourth_moment =
        SymMatrix::symmetrized(ge.products * ge.products.transpose() / static_cast<double>(ge.n - 1));
    est.total_n += ge.n;
    est.groups.push_back(std::move(ge));
  }
  return est;
}

}  // namespace covtest
