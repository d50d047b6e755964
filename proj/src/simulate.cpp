#include "covtest/simulate.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>

#include "covtest/error.hpp"
#include "covtest/parallel.hpp"

namespace covtest {

std::string_view to_string(ErrorDistribution d) {
  switch (d) {
    case ErrorDistribution::standard_normal: return "normal";
    case ErrorDistribution::t9: return "t9";
    case ErrorDistribution::gamma21: return "gamma";
    case ErrorDistribution::skew_normal4: return "skewnormal";
  }
  return "?";
}

ErrorDistribution parse_distribution(std::string_view s) {
  if (s == "normal") return ErrorDistribution::standard_normal;
  if (s == "t9") return ErrorDistribution::t9;
  if (s == "gamma") return ErrorDistribution::gamma21;
  if (s == "skewnormal" || s == "skew_normal") return ErrorDistribution::skew_normal4;
  throw Error(ErrorCode::ConfigError, "unknown distribution '" + std::string(s) + "'");
}

SymMatrix CovStructure::matrix(Index d) const {
  switch (kind) {
    case Kind::autoregressive: {
      Matrix v(d, d);
      for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) v(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
      return SymMatrix(std::move(v));
    }
    case Kind::compound_symmetry:
      return SymMatrix(Matrix::Identity(d, d) + Matrix::Ones(d, d));
    case Kind::explicit_matrix:
      if (explicit_value.rows() != d)
        throw Error(ErrorCode::DimensionMismatch, "explicit covariance has the wrong dimension");
      return SymMatrix(explicit_value);
  }
  throw Error(ErrorCode::ConfigError, "unknown covariance structure");
}

Matrix gen_errors(ErrorDistribution dist, Index d, Index n, Rng& rng) {
  Matrix z(n, d);
  switch (dist) {
    case ErrorDistribution::standard_normal: {
      boost::random::normal_distribution<double> normal;
      for (Index k = 0; k < n; ++k)
        for (Index j = 0; j < d; ++j) z(k, j) = normal(rng);
      break;
    }
    case ErrorDistribution::t9: {
      boost::random::student_t_distribution<double> t(9.0);
      const double scale = 1.0 / std::sqrt(9.0 / 7.0);
      for (Index k = 0; k < n; ++k)
        for (Index j = 0; j < d; ++j) z(k, j) = scale * t(rng);
      break;
    }
    case ErrorDistribution::gamma21: {
      boost::random::gamma_distribution<double> g(2.0, 1.0);
      for (Index k = 0; k < n; ++k)
        for (Index j = 0; j < d; ++j) z(k, j) = (g(rng) - 2.0) / std::numbers::sqrt2;
      break;
    }
    case ErrorDistribution::skew_normal4: {
      // X = delta |U0| + sqrt(1 - delta^2) U1 is skew normal with shape 4
      boost::random::normal_distribution<double> normal;
      constexpr double shape = 4.0;
      const double delta = shape / std::sqrt(1.0 + shape * shape);
      const double mean = delta * std::sqrt(2.0 / std::numbers::pi);
      const double sd = std::sqrt(1.0 - 2.0 * delta * delta / std::numbers::pi);
      const double tail = std::sqrt(1.0 - delta * delta);
      for (Index k = 0; k < n; ++k)
        for (Index j = 0; j < d; ++j) {
          double u0 = normal(rng);
          double u1 = normal(rng);
          z(k, j) = (delta * std::abs(u0) + tail * u1 - mean) / sd;
        }
      break;
    }
  }
  return z;
}

Matrix apply_model_with_root(const Vector& mu, const Matrix& root, const Matrix& z) {
  if (mu.size() != z.cols() || root.rows() != z.cols())
    throw Error(ErrorCode::DimensionMismatch, "mean, root and errors disagree on d");
  Matrix x = z * root.transpose();
  x.rowwise() += mu.transpose();
  return x;
}

Matrix apply_model(const Vector& mu, const SymMatrix& v, const Matrix& z) {
  return apply_model_with_root(mu, psd_factor(v), z);
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::A: return "A";
    case Scenario::B: return "B";
    case Scenario::C: return "C";
    case Scenario::D: return "D";
    case Scenario::E: return "E";
    case Scenario::custom: return "custom";
  }
  return "?";
}

Scenario parse_scenario(std::string_view s) {
  if (s == "A") return Scenario::A;
  if (s == "B") return Scenario::B;
  if (s == "C") return Scenario::C;
  if (s == "D") return Scenario::D;
  if (s == "E") return Scenario::E;
  if (s == "custom") return Scenario::custom;
  throw Error(ErrorCode::ConfigError, "unknown scenario '" + std::string(s) + "'");
}

Index scenario_groups(Scenario s) {
  switch (s) {
    case Scenario::A:
    case Scenario::C: return 2;
    case Scenario::E: return 3;
    case Scenario::B:
    case Scenario::D: return 1;
    case Scenario::custom: return 0;
  }
  return 0;
}

std::vector<Index> split_sizes(Scenario s, Index total) {
  auto part = [total](double f) { return static_cast<Index>(std::llround(f * static_cast<double>(total))); };
  switch (s) {
    case Scenario::A:
    case Scenario::C: return {part(0.6), part(0.4)};
    case Scenario::E: return {part(0.4), part(0.25), part(0.35)};
    case Scenario::B:
    case Scenario::D: return {total};
    case Scenario::custom: break;
  }
  throw Error(ErrorCode::ConfigError, "custom scenarios need explicit group sizes");
}

std::string_view to_string(Alternative a) {
  switch (a) {
    case Alternative::none: return "none";
    case Alternative::one_point: return "one_point";
    case Alternative::trend: return "trend";
  }
  return "?";
}

Alternative parse_alternative(std::string_view s) {
  if (s == "none") return Alternative::none;
  if (s == "one_point") return Alternative::one_point;
  if (s == "trend") return Alternative::trend;
  throw Error(ErrorCode::ConfigError, "unknown alternative '" + std::string(s) + "'");
}

Vector alternative_scaling(Alternative a, Index d, double delta) {
  Vector s = Vector::Ones(d);
  if (a == Alternative::one_point) {
    s[0] += delta;
  } else if (a == Alternative::trend) {
    for (Index j = 0; j < d; ++j) s[j] += static_cast<double>(j + 1) / static_cast<double>(d) * delta;
  }
  return s;
}

SimConfig desk_scale(Scenario s) {
  SimConfig cfg;
  cfg.scenario = s;
  cfg.n_sim = 5000;
  const std::size_t B = 500;
  cfg.tests = {
      {StatisticKind::ats, ParametricBootstrap{B}},
      {StatisticKind::ats, WildBootstrap{B}},
      {StatisticKind::ats, MonteCarloChiSq{10000}},
      {StatisticKind::wts, ParametricBootstrap{B}},
      {StatisticKind::wts, WildBootstrap{B}},
      {StatisticKind::wts, ChiSquareAsymptotic{}},
  };
  return cfg;
}

std::string test_label(const TestCell& cell) {
  std::string label(to_string(cell.kind));
  auto m = method_name(cell.method);
  if (m == "param") return label + "-Para";
  if (m == "wild") return label + "-Wild";
  if (m == "mc") return label + "-MC";
  return label + "-Chisq";
}

const ResultRow* ScenarioResult::find(std::string_view test, const std::vector<Index>& sizes, double delta) const {
  for (const auto& r : rows)
    if (r.test == test && r.sizes == sizes && r.delta == delta) return &r;
  return nullptr;
}

HypothesisSpec scenario_hypothesis(const SimConfig& cfg, HypothesisForm form) {
  switch (cfg.scenario) {
    case Scenario::A: return equal_covariances(2, cfg.d, form);
    case Scenario::B: return equal_diagonal(cfg.d, form);
    case Scenario::C: return equal_traces(2, cfg.d, form);
    case Scenario::D: {
      double gamma = cfg.gamma.value_or(cfg.covariance.matrix(cfg.d).trace());
      return given_trace(cfg.d, gamma, form);
    }
    case Scenario::E: return equal_covariances(3, cfg.d, form);
    case Scenario::custom:
      if (!cfg.custom) throw Error(ErrorCode::ConfigError, "custom scenario without a hypothesis");
      return *cfg.custom;
  }
  throw Error(ErrorCode::ConfigError, "unknown scenario");
}

std::vector<Vector> scenario_means(const SimConfig& cfg, Index groups) {
  if (!cfg.means.empty()) {
    if (static_cast<Index>(cfg.means.size()) != groups)
      throw Error(ErrorCode::ConfigError, "need one mean vector per group");
    for (const auto& m : cfg.means)
      if (m.size() != cfg.d) throw Error(ErrorCode::DimensionMismatch, "mean vector has the wrong length");
    return cfg.means;
  }
  std::vector<Vector> means(static_cast<std::size_t>(groups), Vector::Zero(cfg.d));
  for (Index j = 0; j < cfg.d; ++j) means[0][j] = static_cast<double>((j + 1) * (j + 1)) / 4.0;
  return means;
}

namespace {

struct PreparedStudy {
  HypothesisSpec spec;
  Matrix root;
  std::vector<Vector> means;
};

PreparedStudy prepare(const SimConfig& cfg) {
  if (cfg.n_sim < 1) throw Error(ErrorCode::ConfigError, "n_sim must be >= 1");
  if (cfg.sizes.empty()) throw Error(ErrorCode::ConfigError, "no group-size cells configured");
  if (cfg.tests.empty()) throw Error(ErrorCode::ConfigError, "no tests configured");
  PreparedStudy p{scenario_hypothesis(cfg, cfg.form), psd_factor(cfg.covariance.matrix(cfg.d)), {}};
  for (const auto& s : cfg.sizes)
    if (static_cast<Index>(s.size()) != p.spec.groups)
      throw Error(ErrorCode::ConfigError, "size cell lists " + std::to_string(s.size()) + " groups, hypothesis has " +
                                              std::to_string(p.spec.groups));
  p.means = scenario_means(cfg, p.spec.groups);
  return p;
}

std::vector<GroupSample> make_dataset(const SimConfig& cfg, const PreparedStudy& prep, std::size_t cell,
                                      std::size_t sim, double delta) {
  Rng rng = substream(cfg.seed, {cell, sim, 0});
  const auto& sizes = cfg.sizes.at(cell);
  std::vector<GroupSample> groups;
  groups.reserve(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    Matrix z = gen_errors(cfg.distribution, cfg.d, sizes[i], rng);
    Matrix x = apply_model_with_root(prep.means[i], prep.root, z);
    if (i == 0 && cfg.alternative != Alternative::none && delta != 0.0)
      x = x * alternative_scaling(cfg.alternative, cfg.d, delta).asDiagonal();
    groups.emplace_back("g" + std::to_string(i + 1), std::move(x));
  }
  return groups;
}

ScenarioResult run_study(const SimConfig& cfg, const std::vector<double>& deltas) {
  const PreparedStudy prep = prepare(cfg);
  ScenarioResult out;
  const std::size_t n_tests = cfg.tests.size();
  for (std::size_t cell = 0; cell < cfg.sizes.size(); ++cell) {
    for (double delta : deltas) {
      auto start = std::chrono::steady_clock::now();
      // reject[sim * n_tests + t]
      std::vector<unsigned char> reject(cfg.n_sim * n_tests, 0);
      parallel_for(cfg.n_sim, cfg.threads, [&](std::size_t sim) {
        auto data = make_dataset(cfg, prep, cell, sim, delta);
        CovEstimate est = pooled_estimates(data);
        ResamplingPlan plan{derive_seed(cfg.seed, {cell, sim, 1}), 1};
        auto results = run_tests(est, prep.spec, cfg.tests, plan);
        for (std::size_t t = 0; t < n_tests; ++t) reject[sim * n_tests + t] = results[t].p_value <= cfg.alpha;
      });
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      for (std::size_t t = 0; t < n_tests; ++t) {
        std::size_t hits = 0;
        for (std::size_t s = 0; s < cfg.n_sim; ++s) hits += reject[s * n_tests + t];
        ResultRow row;
        row.test = test_label(cfg.tests[t]);
        row.sizes = cfg.sizes[cell];
        row.delta = delta;
        row.n_sim = cfg.n_sim;
        row.rate = static_cast<double>(hits) / static_cast<double>(cfg.n_sim);
        row.std_error = std::sqrt(row.rate * (1.0 - row.rate) / static_cast<double>(cfg.n_sim));
        row.seconds = seconds;
        out.rows.push_back(std::move(row));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<GroupSample> simulate_dataset(const SimConfig& cfg, std::size_t cell, std::size_t sim, double delta) {
  return make_dataset(cfg, prepare(cfg), cell, sim, delta);
}

ScenarioResult type1_study(const SimConfig& cfg) {
  if (cfg.alternative != Alternative::none)
    throw Error(ErrorCode::ConfigError, "type-I study requires alternative = none");
  return run_study(cfg, {0.0});
}

ScenarioResult power_study(const SimConfig& cfg) {
  if (cfg.alternative == Alternative::none)
    throw Error(ErrorCode::ConfigError, "power study requires a one_point or trend alternative");
  if (cfg.deltas.empty()) throw Error(ErrorCode::ConfigError, "power study needs a delta grid");
  return run_study(cfg, cfg.deltas);
}

std::vector<TimingRow> timing_study(const TimingConfig& cfg, HypothesisForm numerator, HypothesisForm denominator) {
  std::vector<TimingRow> rows;
  for (Index d : cfg.dims) {
    SimConfig base = cfg.base;
    base.d = d;
    base.means.clear();
    base.gamma.reset();
    const std::size_t reps = std::max<std::size_t>(cfg.repetitions, 1);
    std::vector<std::vector<GroupSample>> datasets;
    {
      const PreparedStudy prep = prepare(base);
      for (std::size_t r = 0; r < reps; ++r) datasets.push_back(make_dataset(base, prep, 0, r, 0.0));
    }
    auto time_form = [&](HypothesisForm form, const TestCell& cell) {
      const HypothesisSpec spec = scenario_hypothesis(base, form);
      double total = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        auto start = std::chrono::steady_clock::now();
        CovEstimate est = pooled_estimates(datasets[r]);
        ResamplingPlan plan{derive_seed(base.seed, {r, 7}), 1};
        auto res = run_test(est, spec, cell.kind, cell.method, plan);
        total += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        (void)res;
      }
      return total / static_cast<double>(reps);
    };
    for (const auto& cell : base.tests) {
      TimingRow row;
      row.test = test_label(cell);
      row.d = d;
      row.numerator_seconds = time_form(numerator, cell);
      row.denominator_seconds = numerator == denominator ? row.numerator_seconds : time_form(denominator, cell);
      row.ratio = row.numerator_seconds == row.denominator_seconds ? 1.0
                                                                    : row.numerator_seconds / row.denominator_seconds;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace covtest
