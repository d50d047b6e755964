#include "covtest/engine.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/random/normal_distribution.hpp>

#include "covtest/error.hpp"
#include "covtest/parallel.hpp"

namespace covtest {

std::string_view to_string(StatisticKind k) {
  switch (k) {
    case StatisticKind::ats: return "ATS";
    case StatisticKind::wts: return "WTS";
    case StatisticKind::mats: return "MATS";
  }
  return "?";
}

StatisticKind parse_statistic(std::string_view s) {
  if (s == "ats" || s == "ATS") return StatisticKind::ats;
  if (s == "wts" || s == "WTS") return StatisticKind::wts;
  if (s == "mats" || s == "MATS") return StatisticKind::mats;
  throw Error(ErrorCode::ConfigError, "unknown statistic '" + std::string(s) + "'");
}

std::string_view method_name(const CalibrationMethod& m) {
  struct V {
    std::string_view operator()(const ParametricBootstrap&) const { return "param"; }
    std::string_view operator()(const WildBootstrap&) const { return "wild"; }
    std::string_view operator()(const MonteCarloChiSq&) const { return "mc"; }
    std::string_view operator()(const ChiSquareAsymptotic&) const { return "chisq"; }
  };
  return std::visit(V{}, m);
}

std::size_t method_size(const CalibrationMethod& m) {
  struct V {
    std::size_t operator()(const ParametricBootstrap& p) const { return p.replicates; }
    std::size_t operator()(const WildBootstrap& w) const { return w.replicates; }
    std::size_t operator()(const MonteCarloChiSq& m) const { return m.draws; }
    std::size_t operator()(const ChiSquareAsymptotic&) const { return 0; }
  };
  return std::visit(V{}, m);
}

CalibrationMethod parse_method(std::string_view name, std::size_t B, std::size_t M, WildWeights weights) {
  if (name == "param" || name == "para" || name == "parametric") {
    if (B < 1) throw Error(ErrorCode::ConfigError, "B must be >= 1");
    return ParametricBootstrap{B};
  }
  if (name == "wild") {
    if (B < 1) throw Error(ErrorCode::ConfigError, "B must be >= 1");
    return WildBootstrap{B, weights};
  }
  if (name == "mc") {
    if (M < 1) throw Error(ErrorCode::ConfigError, "M must be >= 1");
    return MonteCarloChiSq{M};
  }
  if (name == "chisq") return ChiSquareAsymptotic{};
  throw Error(ErrorCode::ConfigError, "unknown method '" + std::string(name) + "'");
}

namespace {

constexpr std::uint64_t kFamilyParametric = 1;
constexpr std::uint64_t kFamilyWild = 2;
constexpr std::uint64_t kFamilyMonteCarlo = 3;
// MC draws are cheap; one substream per block of draws
constexpr std::size_t kMcBlock = 256;

struct PinvQuadratic {
  double value = 0.0;
  Index rank = 0;
};

// x^T S^+ x for symmetric PSD S
PinvQuadratic pinv_quadratic(const Matrix& s, const Vector& x, double rel_tol) {
  PinvQuadratic out;
  if (s.rows() == 1) {
    if (s(0, 0) > 0.0) {
      out.value = x[0] * x[0] / s(0, 0);
      out.rank = 1;
    }
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "eigensolver failed in pseudo-inverse");
  const Vector& lam = es.eigenvalues();
  const double scale = lam.cwiseAbs().maxCoeff();
  if (scale == 0.0) return out;
  const double cutoff = rel_tol * scale;
  Vector proj = es.eigenvectors().transpose() * x;
  for (Index i = 0; i < lam.size(); ++i) {
    if (lam[i] > cutoff) {
      out.value += proj[i] * proj[i] / lam[i];
      ++out.rank;
    }
  }
  return out;
}

bool needs(std::span<const StatisticKind> kinds, StatisticKind k) {
  return std::find(kinds.begin(), kinds.end(), k) != kinds.end();
}

// Accumulates per-group projected samples Z_i (m x n_i) into the pieces the
// three statistics need, with zeta = 0.
class ReplicateAccumulator {
 public:
  ReplicateAccumulator(Index m, std::span<const StatisticKind> kinds)
      : kinds_(kinds),
        mean_sum_(Vector::Zero(m)),
        want_cov_(needs(kinds, StatisticKind::wts)),
        want_diag_(needs(kinds, StatisticKind::mats)) {
    if (want_cov_) cov_ = Matrix::Zero(m, m);
    if (want_diag_) cov0_ = Matrix::Zero(m, m);
  }

  bool wants_diagonal() const noexcept { return want_diag_; }

  void add(const Matrix& z, double weight) {
    const double denom = static_cast<double>(z.cols() - 1);
    Vector mean = z.rowwise().mean();
    mean_sum_ += mean;
    Matrix centered = z.colwise() - mean;
    trace_ += weight * centered.squaredNorm() / denom;
    if (want_cov_) cov_.noalias() += (weight / denom) * centered * centered.transpose();
  }

  // coordinate variances of the unprojected sample, for MATS
  void add_diagonal(const Matrix& block, const Matrix& y, double weight) {
    const double denom = static_cast<double>(y.cols() - 1);
    Vector mean = y.rowwise().mean();
    Vector var = (y.colwise() - mean).rowwise().squaredNorm() / denom;
    cov0_.noalias() += weight * block * var.asDiagonal() * block.transpose();
  }

  std::vector<double> finish(Index total_n, double rel_tol) const {
    const double n = static_cast<double>(total_n);
    std::vector<double> out;
    out.reserve(kinds_.size());
    for (auto k : kinds_) {
      switch (k) {
        case StatisticKind::ats:
          out.push_back(trace_ > 0.0 ? n * mean_sum_.squaredNorm() / trace_ : 0.0);
          break;
        case StatisticKind::wts:
          out.push_back(n * pinv_quadratic(cov_, mean_sum_, rel_tol).value);
          break;
        case StatisticKind::mats:
          out.push_back(n * pinv_quadratic(cov0_, mean_sum_, rel_tol).value);
          break;
      }
    }
    return out;
  }

 private:
  std::span<const StatisticKind> kinds_;
  Vector mean_sum_;
  double trace_ = 0.0;
  bool want_cov_;
  bool want_diag_;
  Matrix cov_;
  Matrix cov0_;
};

void check_shapes(const CovEstimate& est, const HypothesisSpec& spec) {
  validate(spec, est.group_count(), est.dim);
}

Matrix projected_diagonal(const CovEstimate& est, const HypothesisSpec& spec) {
  const Index m = spec.rows();
  Matrix out = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < est.groups.size(); ++i) {
    auto block = spec.group_block(static_cast<Index>(i));
    Vector diag = est.groups[i].fourth_moment.matrix().diagonal();
    out.noalias() += est.weight(i) * block * diag.asDiagonal() * block.transpose();
  }
  return out;
}

}  // namespace

Matrix projected_sigma(const CovEstimate& est, const HypothesisSpec& spec) {
  check_shapes(est, spec);
  const Index m = spec.rows();
  Matrix out = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < est.groups.size(); ++i) {
    auto block = spec.group_block(static_cast<Index>(i));
    out.noalias() += est.weight(i) * block * est.groups[i].fourth_moment.matrix() * block.transpose();
  }
  return SymMatrix::symmetrized(out).matrix();
}

double statistic_value(StatisticKind kind, const CovEstimate& est, const HypothesisSpec& spec,
                       std::vector<std::string>* warnings, const EngineOptions& opts) {
  check_shapes(est, spec);
  const Vector diff = spec.C * est.stacked_vech() - spec.zeta;
  if (!diff.allFinite()) throw Error(ErrorCode::NonFinite, "C v-hat - zeta is not finite");
  const double n = static_cast<double>(est.total_n);

  if (kind == StatisticKind::ats) {
    const double tr = projected_sigma(est, spec).trace();
    if (!(tr > 0.0))
      throw Error(ErrorCode::ZeroTrace, "tr(C Sigma-hat C^T) = " + std::to_string(tr) + " (degenerate data)");
    return n * diff.squaredNorm() / tr;
  }

  const Matrix s = kind == StatisticKind::wts ? projected_sigma(est, spec) : projected_diagonal(est, spec);
  auto q = pinv_quadratic(s, diff, opts.pinv_rel_tol);
  if (warnings) {
    const Index rank_c = numerical_rank(spec.C);
    if (q.rank < rank_c) {
      warnings->push_back(std::string(kind == StatisticKind::wts ? "C Sigma-hat C^T" : "C Sigma-hat_0 C^T") +
                          " has rank " + std::to_string(q.rank) + " < rank(C) = " + std::to_string(rank_c) +
                          "; the " + std::string(to_string(kind)) + " needs a full-rank weight matrix to be valid");
    }
  }
  return n * q.value;
}

// ---------------------------------------------------------------- parametric

ParametricResampler::ParametricResampler(const CovEstimate& est, const HypothesisSpec& spec,
                                         std::vector<StatisticKind> kinds, const EngineOptions& opts)
    : kinds_(std::move(kinds)), total_n_(est.total_n), p_(est.vech_dim()), opts_(opts) {
  check_shapes(est, spec);
  const bool mats = needs(kinds_, StatisticKind::mats);
  groups_.reserve(est.groups.size());
  for (std::size_t i = 0; i < est.groups.size(); ++i) {
    const auto& g = est.groups[i];
    auto block = spec.group_block(static_cast<Index>(i));
    if (!mats && spec.rows() < p_) {
      // only C_i Y matters: draw N_m(0, C_i Sigma-hat_i C_i^T) directly
      Matrix projected = block * g.fourth_moment.matrix() * block.transpose();
      groups_.push_back({psd_factor(SymMatrix::symmetrized(projected), opts_.clamp_tol), Matrix(), Matrix(), g.n,
                         est.weight(i)});
      continue;
    }
    Matrix factor = psd_factor(g.fourth_moment, opts_.clamp_tol);
    Group grp{block * factor, Matrix(), Matrix(), g.n, est.weight(i)};
    if (mats) {
      grp.factor = std::move(factor);
      grp.block = block;
    }
    groups_.push_back(std::move(grp));
  }
}

std::vector<double> ParametricResampler::replicate(Rng& rng) const {
  boost::random::normal_distribution<double> normal;
  const Index m = groups_.front().projected_factor.rows();
  ReplicateAccumulator acc(m, kinds_);
  Matrix xi;
  for (const auto& g : groups_) {
    // draw order: observation k outer, coordinate j inner (column-major fill)
    xi.resize(g.projected_factor.cols(), g.n);
    double* data = xi.data();
    for (Index t = 0; t < xi.size(); ++t) data[t] = normal(rng);
    acc.add(g.projected_factor * xi, g.weight);
    if (acc.wants_diagonal()) acc.add_diagonal(g.block, g.factor * xi, g.weight);
  }
  return acc.finish(total_n_, opts_.pinv_rel_tol);
}

// ---------------------------------------------------------------------- wild

WildResampler::WildResampler(const CovEstimate& est, const HypothesisSpec& spec, std::vector<StatisticKind> kinds,
                             WildWeights weights, const EngineOptions& opts)
    : kinds_(std::move(kinds)), weights_(weights), total_n_(est.total_n), opts_(opts) {
  check_shapes(est, spec);
  const bool mats = needs(kinds_, StatisticKind::mats);
  groups_.reserve(est.groups.size());
  for (std::size_t i = 0; i < est.groups.size(); ++i) {
    const auto& g = est.groups[i];
    auto block = spec.group_block(static_cast<Index>(i));
    Group grp{block * g.products, Matrix(), Matrix(), g.n, est.weight(i)};
    if (mats) {
      grp.products = g.products;
      grp.block = block;
    }
    groups_.push_back(std::move(grp));
  }
}

std::vector<double> WildResampler::replicate_with(std::span<const Vector> weights) const {
  if (weights.size() != groups_.size())
    throw Error(ErrorCode::DimensionMismatch, "one weight vector per group required");
  const Index m = groups_.front().projected.rows();
  ReplicateAccumulator acc(m, kinds_);
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    const auto& g = groups_[i];
    if (weights[i].size() != g.n) throw Error(ErrorCode::DimensionMismatch, "weight vector length != n_i");
    acc.add(g.projected * weights[i].asDiagonal(), g.weight);
    if (acc.wants_diagonal()) acc.add_diagonal(g.block, g.products * weights[i].asDiagonal(), g.weight);
  }
  return acc.finish(total_n_, opts_.pinv_rel_tol);
}

std::vector<double> WildResampler::replicate(Rng& rng) const {
  std::vector<Vector> w;
  w.reserve(groups_.size());
  boost::random::normal_distribution<double> normal;
  for (const auto& g : groups_) {
    Vector wi(g.n);
    for (Index k = 0; k < g.n; ++k) {
      wi[k] = weights_ == WildWeights::rademacher ? ((rng() >> 63) ? 1.0 : -1.0) : normal(rng);
    }
    w.push_back(std::move(wi));
  }
  return replicate_with(w);
}

double parametric_bootstrap_replicate(const CovEstimate& est, const HypothesisSpec& spec, StatisticKind kind,
                                      Rng& rng, const EngineOptions& opts) {
  return ParametricResampler(est, spec, {kind}, opts).replicate(rng).front();
}

double wild_bootstrap_replicate(const CovEstimate& est, const HypothesisSpec& spec, StatisticKind kind,
                                WildWeights weights, Rng& rng, const EngineOptions& opts) {
  return WildResampler(est, spec, {kind}, weights, opts).replicate(rng).front();
}

// ------------------------------------------------------------ weighted chi^2

WeightedChiSq::WeightedChiSq(const CovEstimate& est, const HypothesisSpec& spec) {
  const Matrix s = projected_sigma(est, spec);
  const double tr = s.trace();
  if (!(tr > 0.0)) throw Error(ErrorCode::ZeroTrace, "tr(C Sigma-hat C^T) <= 0; weighted chi-square undefined");
  auto eig = sym_eigen(SymMatrix(s));
  std::vector<double> w;
  for (Index i = 0; i < eig.values.size(); ++i)
    if (eig.values[i] > 0.0) w.push_back(eig.values[i] / tr);
  weights_ = Eigen::Map<Vector>(w.data(), static_cast<Index>(w.size()));
}

double WeightedChiSq::draw(Rng& rng) const {
  boost::random::normal_distribution<double> normal;
  double sum = 0.0;
  for (Index k = 0; k < weights_.size(); ++k) {
    double z = normal(rng);
    sum += weights_[k] * z * z;
  }
  return sum;
}

double mc_weighted_chisq_quantile(const CovEstimate& est, const HypothesisSpec& spec, double alpha, std::size_t M,
                                  Rng& rng) {
  if (M < 1) throw Error(ErrorCode::ConfigError, "M must be >= 1");
  WeightedChiSq law(est, spec);
  std::vector<double> draws(M);
  for (auto& x : draws) x = law.draw(rng);
  return NullDistribution::empirical(std::move(draws)).critical_value(alpha);
}

// ------------------------------------------------------------- calibration

NullDistribution NullDistribution::empirical(std::vector<double> values) {
  NullDistribution d;
  std::sort(values.begin(), values.end());
  d.values_ = std::move(values);
  return d;
}

NullDistribution NullDistribution::chi_square(Index df) {
  NullDistribution d;
  d.df_ = df;
  return d;
}

double NullDistribution::p_value(double observed) const {
  if (df_) {
    if (observed <= 0.0) return 1.0;
    boost::math::chi_squared chi(static_cast<double>(*df_));
    return boost::math::cdf(boost::math::complement(chi, observed));
  }
  auto it = std::lower_bound(values_.begin(), values_.end(), observed);
  auto exceed = static_cast<double>(std::distance(it, values_.end()));
  return (1.0 + exceed) / (static_cast<double>(values_.size()) + 1.0);
}

double NullDistribution::critical_value(double alpha) const {
  if (df_) {
    boost::math::chi_squared chi(static_cast<double>(*df_));
    if (alpha <= 0.0) return std::numeric_limits<double>::infinity();
    if (alpha >= 1.0) return 0.0;
    return boost::math::quantile(boost::math::complement(chi, alpha));
  }
  if (values_.empty()) throw Error(ErrorCode::EmptyList, "empty null distribution");
  // inverse empirical CDF at level 1 - alpha
  const double level = std::clamp(1.0 - alpha, 0.0, 1.0);
  auto idx = static_cast<std::size_t>(std::ceil(level * static_cast<double>(values_.size())));
  idx = idx == 0 ? 0 : idx - 1;
  return values_[std::min(idx, values_.size() - 1)];
}

namespace {

template <class Resampler>
std::vector<NullDistribution> run_resampler(const Resampler& r, std::size_t B, std::size_t n_kinds,
                                            std::uint64_t family_seed, unsigned threads) {
  std::vector<std::vector<double>> per_kind(n_kinds, std::vector<double>(B));
  parallel_for(B, threads, [&](std::size_t b) {
    Rng rng = substream(family_seed, {b});
    auto vals = r.replicate(rng);
    for (std::size_t k = 0; k < n_kinds; ++k) per_kind[k][b] = vals[k];
  });
  std::vector<NullDistribution> out;
  out.reserve(n_kinds);
  for (auto& v : per_kind) out.push_back(NullDistribution::empirical(std::move(v)));
  return out;
}

}  // namespace

std::vector<NullDistribution> calibrate(const CovEstimate& est, const HypothesisSpec& spec,
                                        std::span<const StatisticKind> kinds, const CalibrationMethod& method,
                                        const ResamplingPlan& plan, const EngineOptions& opts) {
  std::vector<StatisticKind> ks(kinds.begin(), kinds.end());
  if (const auto* pb = std::get_if<ParametricBootstrap>(&method)) {
    if (pb->replicates < 1) throw Error(ErrorCode::ConfigError, "B must be >= 1");
    ParametricResampler r(est, spec, ks, opts);
    return run_resampler(r, pb->replicates, ks.size(), derive_seed(plan.master_seed, {kFamilyParametric}),
                         plan.threads);
  }
  if (const auto* wb = std::get_if<WildBootstrap>(&method)) {
    if (wb->replicates < 1) throw Error(ErrorCode::ConfigError, "B must be >= 1");
    WildResampler r(est, spec, ks, wb->weights, opts);
    return run_resampler(r, wb->replicates, ks.size(), derive_seed(plan.master_seed, {kFamilyWild}), plan.threads);
  }
  if (const auto* mc = std::get_if<MonteCarloChiSq>(&method)) {
    for (auto k : ks)
      if (k != StatisticKind::ats)
        throw Error(ErrorCode::UnsupportedCombination, "Monte-Carlo calibration is defined for the ATS only");
    if (mc->draws < 1) throw Error(ErrorCode::ConfigError, "M must be >= 1");
    WeightedChiSq law(est, spec);
    const std::size_t blocks = (mc->draws + kMcBlock - 1) / kMcBlock;
    const std::uint64_t seed = derive_seed(plan.master_seed, {kFamilyMonteCarlo});
    std::vector<double> draws(mc->draws);
    parallel_for(blocks, plan.threads, [&](std::size_t blk) {
      Rng rng = substream(seed, {blk});
      const std::size_t end = std::min(mc->draws, (blk + 1) * kMcBlock);
      for (std::size_t j = blk * kMcBlock; j < end; ++j) draws[j] = law.draw(rng);
    });
    return std::vector<NullDistribution>(ks.size(), NullDistribution::empirical(std::move(draws)));
  }
  // asymptotic chi^2_f
  for (auto k : ks)
    if (k != StatisticKind::wts)
      throw Error(ErrorCode::UnsupportedCombination, "the chi-square approximation applies to the WTS only");
  const Index f = numerical_rank(spec.C);
  if (f == 0) throw Error(ErrorCode::RankZero, "hypothesis matrix has rank 0");
  return std::vector<NullDistribution>(ks.size(), NullDistribution::chi_square(f));
}

std::vector<TestResult> run_tests(const CovEstimate& est, const HypothesisSpec& spec, std::span<const TestCell> cells,
                                  const ResamplingPlan& plan, std::optional<double> alpha,
                                  const EngineOptions& opts) {
  std::vector<TestResult> results(cells.size());
  std::vector<bool> done(cells.size(), false);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (done[c]) continue;
    // gather every cell sharing this method (same family and size)
    std::vector<std::size_t> members;
    std::vector<StatisticKind> kinds;
    for (std::size_t o = c; o < cells.size(); ++o) {
      if (done[o] || cells[o].method.index() != cells[c].method.index() ||
          method_size(cells[o].method) != method_size(cells[c].method))
        continue;
      if (const auto* w = std::get_if<WildBootstrap>(&cells[o].method))
        if (w->weights != std::get<WildBootstrap>(cells[c].method).weights) continue;
      members.push_back(o);
      kinds.push_back(cells[o].kind);
    }
    auto nulls = calibrate(est, spec, kinds, cells[c].method, plan, opts);
    for (std::size_t j = 0; j < members.size(); ++j) {
      const auto& cell = cells[members[j]];
      TestResult& r = results[members[j]];
      r.kind = cell.kind;
      r.method = std::string(method_name(cell.method));
      r.replicates = method_size(cell.method);
      r.seed = plan.master_seed;
      r.value = statistic_value(cell.kind, est, spec, &r.warnings, opts);
      r.p_value = nulls[j].p_value(r.value);
      r.degrees_of_freedom = nulls[j].degrees_of_freedom();
      if (alpha) r.critical_value = nulls[j].critical_value(*alpha);
      done[members[j]] = true;
    }
  }
  return results;
}

TestResult run_test(const CovEstimate& est, const HypothesisSpec& spec, StatisticKind kind,
                    const CalibrationMethod& method, const ResamplingPlan& plan, std::optional<double> alpha,
                    const EngineOptions& opts) {
  TestCell cell{kind, method};
  return run_tests(est, spec, std::span<const TestCell>(&cell, 1), plan, alpha, opts).front();
}

TestResult run_test(const std::vector<GroupSample>& samples, const HypothesisSpec& spec, StatisticKind kind,
                    const CalibrationMethod& method, const ResamplingPlan& plan, std::optional<double> alpha,
                    const EngineOptions& opts) {
  return run_test(pooled_estimates(samples), spec, kind, method, plan, alpha, opts);
}

// ------------------------------------------------------ trace intervals

TraceInterval trace_confidence_interval(const GroupSample& sample, StatisticKind kind,
                                        const CalibrationMethod& method, double alpha, const ResamplingPlan& plan,
                                        const EngineOptions& opts) {
  const std::vector<GroupSample> samples{sample};
  const CovEstimate est = pooled_estimates(samples);
  const Index d = est.dim;
  TraceInterval out;
  out.estimate = est.groups.front().cov.trace();

  const HypothesisSpec at_estimate = given_trace(d, out.estimate, HypothesisForm::reduced);
  if (!(projected_sigma(est, at_estimate).trace() > 0.0)) {
    out.lower = out.upper = out.estimate;
    out.warnings.push_back("degenerate sample: tr(C Sigma-hat C^T) is zero, interval collapsed to the estimate");
    return out;
  }

  const StatisticKind kinds[] = {kind};
  const NullDistribution null = calibrate(est, at_estimate, kinds, method, plan, opts).front();
  auto p_at = [&](double gamma) {
    return null.p_value(statistic_value(kind, est, given_trace(d, gamma, HypothesisForm::reduced), nullptr, opts));
  };
  if (p_at(out.estimate) < alpha) {
    out.lower = out.upper = out.estimate;
    out.warnings.push_back("p-value at the point estimate is below alpha; empty acceptance region");
    return out;
  }

  const double se = std::sqrt(projected_sigma(est, at_estimate)(0, 0) / static_cast<double>(est.total_n)) *
                    static_cast<double>(d);
  constexpr int kMaxExpand = 200;
  constexpr int kMaxBisect = 200;

  auto boundary = [&](double direction) {
    double inside = out.estimate;
    double step = se > 0.0 ? se : std::max(1.0, std::abs(out.estimate));
    double outside = inside + direction * step;
    int it = 0;
    while (p_at(outside) >= alpha) {
      inside = outside;
      step *= 2.0;
      outside = out.estimate + direction * step;
      if (++it > kMaxExpand || !std::isfinite(outside))
        throw Error(ErrorCode::NonConvergent, "could not bracket the confidence limit");
    }
    for (int b = 0; b < kMaxBisect; ++b) {
      double mid = 0.5 * (inside + outside);
      if (mid == inside || mid == outside) return inside;
      (p_at(mid) >= alpha ? inside : outside) = mid;
    }
    const double gap = std::abs(outside - inside);
    if (gap > 1e-9 * std::max(1.0, std::abs(inside)))
      throw Error(ErrorCode::NonConvergent, "bisection did not converge");
    return inside;
  };
  out.lower = boundary(-1.0);
  out.upper = boundary(+1.0);
  return out;
}

}  // namespace covtest
