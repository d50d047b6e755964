#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "covtest/engine.hpp"

namespace covtest {

/// Marginal law of the i.i.d. error components; every branch is standardized
/// to mean 0 and variance 1.
enum class ErrorDistribution {
  standard_normal,
  t9,            // t with 9 df, scaled by 1 / sqrt(9/7)
  gamma21,       // (G - 2) / sqrt(2), G ~ Gamma(shape 2, rate 1)
  skew_normal4,  // skew normal (0, 1, 4), centered and scaled
};

std::string_view to_string(ErrorDistribution d);
ErrorDistribution parse_distribution(std::string_view s);

struct CovStructure {
  enum class Kind { autoregressive, compound_symmetry, explicit_matrix };
  Kind kind = Kind::autoregressive;
  double rho = 0.6;
  Matrix explicit_value;

  static CovStructure ar(double rho) { return {Kind::autoregressive, rho, {}}; }
  /// I_d + J_d
  static CovStructure compound_symmetry() { return {Kind::compound_symmetry, 0.0, {}}; }
  static CovStructure given(const SymMatrix& v) { return {Kind::explicit_matrix, 0.0, v.matrix()}; }

  SymMatrix matrix(Index d) const;
};

/// n x d matrix of standardized errors; draws fill observation by observation.
Matrix gen_errors(ErrorDistribution dist, Index d, Index n, Rng& rng);

/// Rows mu^T + (L z_k)^T with L the symmetric PSD root of V.
Matrix apply_model(const Vector& mu, const SymMatrix& v, const Matrix& z);
/// Same with a precomputed root.
Matrix apply_model_with_root(const Vector& mu, const Matrix& root, const Matrix& z);

enum class Scenario { A, B, C, D, E, custom };

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view s);
/// Number of groups the scenario's hypothesis acts on.
Index scenario_groups(Scenario s);
/// Group sizes from a total N: A, C -> (0.6, 0.4) N; E -> (0.4, 0.25, 0.35) N;
/// B, D -> N.
std::vector<Index> split_sizes(Scenario s, Index total);

enum class Alternative { none, one_point, trend };

std::string_view to_string(Alternative a);
Alternative parse_alternative(std::string_view s);

/// Delta = I + diag(1, 0, ..., 0) delta  (one_point)
///       = I + diag(1, 2, ..., d) / d delta  (trend)
Vector alternative_scaling(Alternative a, Index d, double delta);

struct SimConfig {
  Scenario scenario = Scenario::A;
  HypothesisForm form = HypothesisForm::quadratic;
  Index d = 5;
  /// one entry per cell; each entry lists n_1, ..., n_a
  std::vector<std::vector<Index>> sizes;
  ErrorDistribution distribution = ErrorDistribution::standard_normal;
  CovStructure covariance = CovStructure::ar(0.6);
  /// empty: group 1 gets (1^2, ..., d^2) / 4, the rest 0
  std::vector<Vector> means;
  std::vector<TestCell> tests;
  std::size_t n_sim = 5000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  Alternative alternative = Alternative::none;
  std::vector<double> deltas;
  /// scenario D target; defaults to tr(V)
  std::optional<double> gamma;
  /// scenario custom
  std::optional<HypothesisSpec> custom;
};

/// Desk-scale defaults: N_sim 5000, B 500, M 10000.
SimConfig desk_scale(Scenario s);

/// "ATS-Para", "ATS-Wild", "ATS-MC", "WTS-Chisq", ...
std::string test_label(const TestCell& cell);

struct ResultRow {
  std::string test;
  std::vector<Index> sizes;
  double delta = 0.0;
  double rate = 0.0;
  double std_error = 0.0;
  std::size_t n_sim = 0;
  double seconds = 0.0;
};

struct ScenarioResult {
  std::vector<ResultRow> rows;
  const ResultRow* find(std::string_view test, const std::vector<Index>& sizes, double delta = 0.0) const;
};

HypothesisSpec scenario_hypothesis(const SimConfig& cfg, HypothesisForm form);
std::vector<Vector> scenario_means(const SimConfig& cfg, Index groups);

/// Dataset `sim` of size cell `cell`. Data for a given (seed, cell, sim) are
/// the same for every delta; the alternative rescales group 1 afterwards.
std::vector<GroupSample> simulate_dataset(const SimConfig& cfg, std::size_t cell, std::size_t sim, double delta = 0.0);

/// Rejection rates under H0, one row per (test, size cell).
ScenarioResult type1_study(const SimConfig& cfg);

/// Rejection rates over the delta grid, one row per (test, size cell, delta).
ScenarioResult power_study(const SimConfig& cfg);

struct TimingRow {
  std::string test;
  Index d = 0;
  double numerator_seconds = 0.0;
  double denominator_seconds = 0.0;
  double ratio = 1.0;
};

struct TimingConfig {
  SimConfig base;              // scenario, distribution, sizes (first cell), tests
  std::vector<Index> dims;
  std::size_t repetitions = 3;
};

/// Mean wall time of each test under `numerator` relative to `denominator`,
/// per dimension. Identical forms are timed once, giving a ratio of exactly 1.
std::vector<TimingRow> timing_study(const TimingConfig& cfg, HypothesisForm numerator, HypothesisForm denominator);

}  // namespace covtest
