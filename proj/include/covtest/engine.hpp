#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "covtest/estimate.hpp"
#include "covtest/hypothesis.hpp"
#include "covtest/rng.hpp"

namespace covtest {

enum class StatisticKind { ats, wts, mats };

std::string_view to_string(StatisticKind k);
StatisticKind parse_statistic(std::string_view s);

enum class WildWeights { rademacher, gaussian };

struct ParametricBootstrap {
  std::size_t replicates = 1000;
};
struct WildBootstrap {
  std::size_t replicates = 1000;
  WildWeights weights = WildWeights::rademacher;
};
/// Weighted chi-square null law of the ATS, sampled with plug-in eigenvalues.
struct MonteCarloChiSq {
  std::size_t draws = 10000;
};
/// chi^2_f reference for the WTS, f = rank(C).
struct ChiSquareAsymptotic {};

using CalibrationMethod = std::variant<ParametricBootstrap, WildBootstrap, MonteCarloChiSq, ChiSquareAsymptotic>;

/// Short name used in reports: "param", "wild", "mc", "chisq".
std::string_view method_name(const CalibrationMethod& m);
/// Replicate / draw count, 0 for the asymptotic method.
std::size_t method_size(const CalibrationMethod& m);
CalibrationMethod parse_method(std::string_view name, std::size_t B, std::size_t M,
                               WildWeights weights = WildWeights::rademacher);

/// Replicate r draws from substream (master_seed, family, r); the thread
/// count only changes scheduling.
struct ResamplingPlan {
  std::uint64_t master_seed = 1;
  unsigned threads = 1;  // 0: hardware concurrency
};

struct EngineOptions {
  /// relative cutoff for the Moore-Penrose inverse inside WTS / MATS
  double pinv_rel_tol = 1e-10;
  /// negative-eigenvalue slack when factoring Sigma-hat_i
  double clamp_tol = 1e-10;
};

struct TestResult {
  StatisticKind kind = StatisticKind::ats;
  double value = 0.0;
  double p_value = 1.0;
  std::string method;
  std::size_t replicates = 0;
  std::optional<double> critical_value;
  std::optional<Index> degrees_of_freedom;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

/// C Sigma-hat C^T assembled block-wise, sum_i (N / n_i) C_i Sigma-hat_i C_i^T.
Matrix projected_sigma(const CovEstimate& est, const HypothesisSpec& spec);

/// Observed ATS / WTS / MATS. ATS throws Error{ZeroTrace} when
/// tr(C Sigma-hat C^T) <= 0. Rank-deficiency caveats for WTS / MATS are
/// appended to *warnings when given.
double statistic_value(StatisticKind kind, const CovEstimate& est, const HypothesisSpec& spec,
                       std::vector<std::string>* warnings = nullptr, const EngineOptions& opts = {});

/// Parametric bootstrap: per group, n_i draws of N_p(0, Sigma-hat_i), with
/// the statistic recomputed from the bootstrap mean and covariance and
/// zeta = 0. Precomputes C_i L_i once; each replicate returns one value per
/// requested kind, all from the same draws. When C has fewer rows than p and
/// MATS is not requested, the m-dimensional projections C_i Y are drawn
/// directly from N_m(0, C_i Sigma-hat_i C_i^T), which has the same law.
class ParametricResampler {
 public:
  ParametricResampler(const CovEstimate& est, const HypothesisSpec& spec, std::vector<StatisticKind> kinds,
                      const EngineOptions& opts = {});
  std::vector<double> replicate(Rng& rng) const;

 private:
  struct Group {
    Matrix projected_factor;  // C_i L_i (m x p), or a root of C_i Sigma-hat_i C_i^T (m x m)
    Matrix factor;            // L_i, only kept for MATS
    Matrix block;             // C_i, only kept for MATS
    Index n;
    double weight;
  };
  std::vector<Group> groups_;
  std::vector<StatisticKind> kinds_;
  Index total_n_;
  Index p_;
  EngineOptions opts_;
};

/// Wild bootstrap: Y_ik = W_ik * D_ik with D the centered vech'd cross
/// products and W i.i.d. mean 0, variance 1.
class WildResampler {
 public:
  WildResampler(const CovEstimate& est, const HypothesisSpec& spec, std::vector<StatisticKind> kinds,
                WildWeights weights, const EngineOptions& opts = {});
  std::vector<double> replicate(Rng& rng) const;
  /// Same statistic with caller-supplied weights (one vector per group).
  std::vector<double> replicate_with(std::span<const Vector> weights) const;

 private:
  struct Group {
    Matrix projected;  // C_i D_i, m x n
    Matrix products;   // D_i, only kept for MATS
    Matrix block;      // C_i, only kept for MATS
    Index n;
    double weight;
  };
  std::vector<Group> groups_;
  std::vector<StatisticKind> kinds_;
  WildWeights weights_;
  Index total_n_;
  EngineOptions opts_;
};

double parametric_bootstrap_replicate(const CovEstimate& est, const HypothesisSpec& spec, StatisticKind kind,
                                      Rng& rng, const EngineOptions& opts = {});
double wild_bootstrap_replicate(const CovEstimate& est, const HypothesisSpec& spec, StatisticKind kind,
                                WildWeights weights, Rng& rng, const EngineOptions& opts = {});

/// sum_k lambda_k B_k / tr(C Sigma-hat C^T), B_k ~ chi^2_1, lambda_k the
/// (clamped) eigenvalues of C Sigma-hat C^T.
class WeightedChiSq {
 public:
  /// Throws Error{ZeroTrace} if tr(C Sigma-hat C^T) <= 0.
  WeightedChiSq(const CovEstimate& est, const HypothesisSpec& spec);
  double draw(Rng& rng) const;
  const Vector& weights() const noexcept { return weights_; }

 private:
  Vector weights_;  // lambda_k / trace, positive entries only
};

/// Empirical (1 - alpha)-quantile of M weighted chi-square draws; alpha = 1
/// returns the smallest draw.
double mc_weighted_chisq_quantile(const CovEstimate& est, const HypothesisSpec& spec, double alpha,
                                  std::size_t M, Rng& rng);

/// Reference distribution for one statistic under one calibration method.
class NullDistribution {
 public:
  static NullDistribution empirical(std::vector<double> values);
  static NullDistribution chi_square(Index df);

  /// Bootstrap / MC: (1 + #{values >= observed}) / (B + 1).
  /// chi-square: upper tail probability.
  double p_value(double observed) const;
  double critical_value(double alpha) const;
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& sorted_values() const noexcept { return values_; }
  std::optional<Index> degrees_of_freedom() const noexcept { return df_; }

 private:
  std::vector<double> values_;
  std::optional<Index> df_;
};

/// Null distributions for several kinds under one method, sharing draws.
/// MonteCarloChiSq only supports ATS and ChiSquareAsymptotic only WTS;
/// other pairings throw Error{UnsupportedCombination}.
std::vector<NullDistribution> calibrate(const CovEstimate& est, const HypothesisSpec& spec,
                                        std::span<const StatisticKind> kinds, const CalibrationMethod& method,
                                        const ResamplingPlan& plan, const EngineOptions& opts = {});

struct TestCell {
  StatisticKind kind;
  CalibrationMethod method;
};

/// Observed statistics and p-values for several (kind, method) cells on one
/// dataset. Cells with the same method family share replicates, so the
/// result for a cell equals what run_test returns for it alone.
std::vector<TestResult> run_tests(const CovEstimate& est, const HypothesisSpec& spec, std::span<const TestCell> cells,
                                  const ResamplingPlan& plan, std::optional<double> alpha = std::nullopt,
                                  const EngineOptions& opts = {});

TestResult run_test(const CovEstimate& est, const HypothesisSpec& spec, StatisticKind kind,
                    const CalibrationMethod& method, const ResamplingPlan& plan,
                    std::optional<double> alpha = std::nullopt, const EngineOptions& opts = {});
TestResult run_test(const std::vector<GroupSample>& samples, const HypothesisSpec& spec, StatisticKind kind,
                    const CalibrationMethod& method, const ResamplingPlan& plan,
                    std::optional<double> alpha = std::nullopt, const EngineOptions& opts = {});

struct TraceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double estimate = 0.0;  // tr(V-hat_1)
  std::vector<std::string> warnings;
};

/// {gamma : p-value of H0: tr(V_1) = gamma is >= alpha}, found by expanding
/// a bracket from tr(V-hat_1) outward and bisecting on each side. The null
/// distribution does not depend on gamma, so it is built once.
TraceInterval trace_confidence_interval(const GroupSample& sample, StatisticKind kind,
                                        const CalibrationMethod& method, double alpha, const ResamplingPlan& plan,
                                        const EngineOptions& opts = {});

}  // namespace covtest
