#include <catch_amalgamated.hpp>

#include <algorithm>
#include <boost/math/distributions/gamma.hpp>

#include "covtest/error.hpp"
#include "covtest/simulate.hpp"

using namespace covtest;
using Catch::Matchers::WithinAbs;

namespace {

struct Moments {
  double mean, var, skew;
};

Moments moments(const Matrix& z) {
  const double n = static_cast<double>(z.size());
  const double mean = z.sum() / n;
  double m2 = 0, m3 = 0;
  for (Index i = 0; i < z.size(); ++i) {
    const double c = z.data()[i] - mean;
    m2 += c * c;
    m3 += c * c * c;
  }
  m2 /= n;
  m3 /= n;
  return {mean, m2, m3 / std::pow(m2, 1.5)};
}

SimConfig small_config(Scenario s) {
  SimConfig cfg = desk_scale(s);
  cfg.d = 3;
  cfg.n_sim = 200;
  cfg.sizes = {split_sizes(s, 40)};
  cfg.tests = {{StatisticKind::ats, ParametricBootstrap{99}},
               {StatisticKind::ats, WildBootstrap{99}},
               {StatisticKind::wts, ChiSquareAsymptotic{}}};
  cfg.threads = 1;
  return cfg;
}

}  // namespace

TEST_CASE("error generators are standardized", "[simulate]") {
  for (auto dist : {ErrorDistribution::standard_normal, ErrorDistribution::t9, ErrorDistribution::gamma21,
                    ErrorDistribution::skew_normal4}) {
    Rng rng(derive_seed(123, {static_cast<std::uint64_t>(dist)}));
    Matrix z = gen_errors(dist, 4, 250000, rng);
    REQUIRE(z.rows() == 250000);
    REQUIRE(z.cols() == 4);
    auto m = moments(z);
    INFO(to_string(dist) << " mean " << m.mean << " var " << m.var);
    CHECK(std::abs(m.mean) < 0.005);
    CHECK(std::abs(m.var - 1.0) < 0.01);
    if (dist == ErrorDistribution::skew_normal4) CHECK(m.skew > 0.5);
  }
}

TEST_CASE("gamma branch reproduces Gamma(2, 1) quantiles", "[simulate]") {
  Rng rng(31);
  Matrix z = gen_errors(ErrorDistribution::gamma21, 1, 1000000, rng);
  std::vector<double> g(z.data(), z.data() + z.size());
  for (auto& x : g) x = std::sqrt(2.0) * x + 2.0;
  std::sort(g.begin(), g.end());
  boost::math::gamma_distribution<double> law(2.0, 1.0);
  for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) {
    const double emp = g[static_cast<std::size_t>(q * static_cast<double>(g.size()))];
    CHECK_THAT(emp, WithinAbs(boost::math::quantile(law, q), 0.01));
  }
  CHECK(g.front() > 0.0);
}

TEST_CASE("covariance structures", "[simulate]") {
  SymMatrix ar = CovStructure::ar(0.6).matrix(4);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) CHECK(ar(i, j) == std::pow(0.6, std::abs(i - j)));
  SymMatrix cs = CovStructure::compound_symmetry().matrix(5);
  CHECK(cs.matrix() == Matrix::Identity(5, 5) + Matrix::Ones(5, 5));
  CHECK(CovStructure::given(cs).matrix(5).matrix() == cs.matrix());
  CHECK_THROWS_AS(CovStructure::given(cs).matrix(4), Error);
}

TEST_CASE("apply_model", "[simulate]") {
  Vector mu(3);
  mu << 1, -2, 0.5;
  SymMatrix v = CovStructure::ar(0.6).matrix(3);
  Matrix x0 = apply_model(mu, v, Matrix::Zero(4, 3));
  for (Index k = 0; k < 4; ++k) CHECK(x0.row(k) == mu.transpose());

  Rng rng(2);
  Matrix z = gen_errors(ErrorDistribution::standard_normal, 3, 10, rng);
  Matrix xi = apply_model(mu, SymMatrix::identity(3), z);
  CHECK((xi - (z.rowwise() + mu.transpose())).cwiseAbs().maxCoeff() < 1e-14);

  Matrix big = apply_model(Vector::Zero(5), CovStructure::ar(0.6).matrix(5),
                           gen_errors(ErrorDistribution::standard_normal, 5, 100000, rng));
  Matrix c = big.rowwise() - big.colwise().mean();
  Matrix cov = c.transpose() * c / static_cast<double>(big.rows() - 1);
  CHECK((cov - CovStructure::ar(0.6).matrix(5).matrix()).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("scenario plumbing", "[simulate]") {
  CHECK(split_sizes(Scenario::A, 250) == std::vector<Index>{150, 100});
  CHECK(split_sizes(Scenario::C, 50) == std::vector<Index>{30, 20});
  CHECK(split_sizes(Scenario::E, 100) == std::vector<Index>{40, 25, 35});
  CHECK(split_sizes(Scenario::B, 25) == std::vector<Index>{25});
  CHECK(scenario_groups(Scenario::E) == 3);
  CHECK(scenario_groups(Scenario::D) == 1);
  for (auto s : {Scenario::A, Scenario::B, Scenario::C, Scenario::D, Scenario::E}) CHECK(parse_scenario(to_string(s)) == s);

  Vector one = alternative_scaling(Alternative::one_point, 4, 2.0);
  CHECK(one == Vector((Vector(4) << 3, 1, 1, 1).finished()));
  Vector trend = alternative_scaling(Alternative::trend, 4, 2.0);
  CHECK(trend == Vector((Vector(4) << 1.5, 2, 2.5, 3).finished()));
  CHECK(alternative_scaling(Alternative::none, 3, 2.0) == Vector::Ones(3));

  SimConfig cfg = desk_scale(Scenario::A);
  auto means = scenario_means(cfg, 2);
  CHECK(means[0] == Vector((Vector(5) << 0.25, 1, 2.25, 4, 6.25).finished()));
  CHECK(means[1] == Vector::Zero(5));
  CHECK(test_label(cfg.tests[0]) == "ATS-Para");
  CHECK(test_label(cfg.tests[5]) == "WTS-Chisq");
}

TEST_CASE("generated data satisfy the null hypothesis in population", "[simulate]") {
  for (auto s : {Scenario::A, Scenario::B, Scenario::C, Scenario::D, Scenario::E}) {
    SimConfig cfg = desk_scale(s);
    auto spec = scenario_hypothesis(cfg, HypothesisForm::quadratic);
    Vector v = vech(cfg.covariance.matrix(cfg.d)).values();
    Vector stacked(spec.C.cols());
    for (Index i = 0; i < spec.groups; ++i) stacked.segment(i * v.size(), v.size()) = v;
    CHECK((spec.C * stacked - spec.zeta).norm() < 1e-12);
  }
}

TEST_CASE("datasets depend only on seed, cell and simulation index", "[simulate]") {
  SimConfig cfg = small_config(Scenario::A);
  auto a = simulate_dataset(cfg, 0, 5);
  auto b = simulate_dataset(cfg, 0, 5);
  CHECK(a[0].observations() == b[0].observations());
  CHECK(a[1].observations() == b[1].observations());
  auto c = simulate_dataset(cfg, 0, 6);
  CHECK(a[0].observations() != c[0].observations());

  cfg.alternative = Alternative::one_point;
  auto shifted = simulate_dataset(cfg, 0, 5, 1.5);
  Vector scale = alternative_scaling(Alternative::one_point, cfg.d, 1.5);
  CHECK(shifted[0].observations() == a[0].observations() * scale.asDiagonal());
  CHECK(shifted[1].observations() == a[1].observations());
}

TEST_CASE("type-I study is deterministic across thread counts", "[simulate]") {
  SimConfig cfg = small_config(Scenario::A);
  auto one = type1_study(cfg);
  cfg.threads = 3;
  auto three = type1_study(cfg);
  REQUIRE(one.rows.size() == 3);
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    CHECK(one.rows[i].test == three.rows[i].test);
    CHECK(one.rows[i].rate == three.rows[i].rate);
    const double r = one.rows[i].rate;
    CHECK(one.rows[i].std_error == std::sqrt(r * (1 - r) / 200.0));
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
  CHECK(one.find("ATS-Para", cfg.sizes[0]) != nullptr);
}

TEST_CASE("rejection rates agree with a doubled rerun within their error bars", "[simulate]") {
  SimConfig cfg = small_config(Scenario::C);
  cfg.n_sim = 400;
  auto base = type1_study(cfg);
  cfg.n_sim = 800;
  cfg.seed = 2;
  auto doubled = type1_study(cfg);
  for (std::size_t i = 0; i < base.rows.size(); ++i) {
    const double r = base.rows[i].rate;
    INFO(base.rows[i].test << " " << r << " vs " << doubled.rows[i].rate);
    CHECK(std::abs(r - doubled.rows[i].rate) <= 3.0 * std::sqrt(std::max(r * (1 - r), 0.01) / 400.0));
  }
}

TEST_CASE("alpha = 0 never rejects", "[simulate]") {
  SimConfig cfg = small_config(Scenario::B);
  cfg.alpha = 0.0;
  cfg.n_sim = 50;
  for (const auto& row : type1_study(cfg).rows) CHECK(row.rate == 0.0);
}

TEST_CASE("group means do not affect rejection rates", "[simulate]") {
  SimConfig cfg = small_config(Scenario::A);
  auto with_means = type1_study(cfg);
  cfg.means = {Vector::Zero(3), Vector::Zero(3)};
  auto without = type1_study(cfg);
  for (std::size_t i = 0; i < with_means.rows.size(); ++i) {
    const auto& a = with_means.rows[i];
    const auto& b = without.rows[i];
    const double se = std::sqrt(std::max(a.rate * (1 - a.rate), 0.01) / static_cast<double>(a.n_sim));
    CHECK(std::abs(a.rate - b.rate) <= 3 * se);
  }
}

TEST_CASE("power study starts at the null rate and grows", "[simulate]") {
  SimConfig cfg = small_config(Scenario::A);
  cfg.distribution = ErrorDistribution::skew_normal4;
  cfg.sizes = {{30, 20}};
  auto null = type1_study(cfg);
  cfg.alternative = Alternative::one_point;
  cfg.deltas = {0.0, 1.0, 3.0};
  auto power = power_study(cfg);
  for (const auto& t : {"ATS-Para", "ATS-Wild", "WTS-Chisq"}) {
    const auto* r0 = power.find(t, cfg.sizes[0], 0.0);
    const auto* r3 = power.find(t, cfg.sizes[0], 3.0);
    REQUIRE(r0);
    REQUIRE(r3);
    CHECK(r0->rate == null.find(t, cfg.sizes[0])->rate);
    CHECK(r3->rate > r0->rate);
  }
  cfg.alternative = Alternative::none;
  CHECK_THROWS_AS(power_study(cfg), Error);
}

TEST_CASE("scenario E runs with three groups", "[simulate]") {
  SimConfig cfg = small_config(Scenario::E);
  cfg.n_sim = 20;
  cfg.sizes = {split_sizes(Scenario::E, 60)};
  auto res = type1_study(cfg);
  CHECK(res.rows.size() == 3);
}

TEST_CASE("timing study ratios", "[simulate]") {
  TimingConfig tc;
  tc.base = desk_scale(Scenario::D);
  tc.base.sizes = {{30}};
  tc.base.tests = {{StatisticKind::ats, ParametricBootstrap{50}}};
  tc.dims = {2, 4};
  tc.repetitions = 2;
  auto same = timing_study(tc, HypothesisForm::quadratic, HypothesisForm::quadratic);
  REQUIRE(same.size() == 2);
  for (const auto& r : same) CHECK(r.ratio == 1.0);
  auto rel = timing_study(tc, HypothesisForm::reduced, HypothesisForm::quadratic);
  for (const auto& r : rel) CHECK(r.ratio > 0.0);
}

TEST_CASE("simulation configuration errors", "[simulate]") {
  SimConfig cfg = small_config(Scenario::A);
  cfg.sizes = {{30}};
  CHECK_THROWS_AS(type1_study(cfg), Error);
  cfg = small_config(Scenario::A);
  cfg.alternative = Alternative::trend;
  CHECK_THROWS_AS(type1_study(cfg), Error);
  CHECK_THROWS_AS(parse_distribution("cauchy"), Error);
}
