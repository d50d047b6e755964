// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance                 run every criterion
//   acceptance --criterion N   run criterion N only
//
// Exit status is 0 iff every selected criterion passed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "covtest/parallel.hpp"
#include "covtest/simulate.hpp"

using namespace covtest;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr std::uint64_t kSeed = 1;

// |rate - target| <= tol for one study cell
Outcome rate_near(const ScenarioResult& res, const std::string& test, const std::vector<Index>& sizes, double target,
                  double tol) {
  const ResultRow* row = res.find(test, sizes);
  if (!row) return {false, "row missing"};
  const bool ok = std::abs(row->rate - target) <= tol;
  return {ok, fmt("%s rate %.4f (se %.4f), target %.4f +- %.3f, %zu sims, %.0f s", test.c_str(), row->rate,
                  row->std_error, target, tol, row->n_sim, row->seconds)};
}

// sup |F(x) - G(x)| between two empirical distributions
double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// sup |F_n(x) - x| against U(0, 1), ties handled by evaluating both sides of each jump
double ks_uniform(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::size_t j = i;
    while (j + 1 < p.size() && p[j + 1] == p[i]) ++j;
    d = std::max(d, std::abs(static_cast<double>(j + 1) / n - p[i]));
    d = std::max(d, std::abs(p[i] - static_cast<double>(i) / n));
    i = j;
  }
  return d;
}

// two-sample KS critical value at 1%: c(alpha) sqrt((n + m) / (n m))
double ks_critical_1pct(double n, double m) { return 1.628 * std::sqrt((n + m) / (n * m)); }

// ---------------------------------------------------------------------------

Outcome criterion_1() {
  SimConfig cfg = desk_scale(Scenario::A);
  cfg.sizes = {{150, 100}};
  cfg.tests = {{StatisticKind::ats, ParametricBootstrap{500}}};
  cfg.seed = kSeed;
  return rate_near(type1_study(cfg), "ATS-Para", {150, 100}, 0.0518, 0.012);
}

Outcome criterion_2() {
  SimConfig cfg = desk_scale(Scenario::A);
  cfg.sizes = {{30, 20}};
  cfg.tests = {{StatisticKind::wts, ChiSquareAsymptotic{}}};
  cfg.seed = kSeed;
  return rate_near(type1_study(cfg), "WTS-Chisq", {30, 20}, 0.5000, 0.05);
}

Outcome criterion_3() {
  SimConfig cfg = desk_scale(Scenario::B);
  cfg.sizes = {{25}};
  cfg.tests = {{StatisticKind::ats, ParametricBootstrap{500}}};
  cfg.seed = kSeed;
  return rate_near(type1_study(cfg), "ATS-Para", {25}, 0.0465, 0.012);
}

Outcome criterion_4() {
  // scenario C has a rank-1 hypothesis; compare the three statistics dataset by dataset
  double max_wts = 0.0, max_mats = 0.0;
  std::size_t datasets = 0;
  for (auto dist : {ErrorDistribution::standard_normal, ErrorDistribution::skew_normal4, ErrorDistribution::gamma21}) {
    SimConfig cfg = desk_scale(Scenario::C);
    cfg.distribution = dist;
    cfg.seed = kSeed;
    for (Index total : {50, 100, 250, 500}) cfg.sizes.push_back(split_sizes(Scenario::C, total));
    for (auto form : {HypothesisForm::reduced, HypothesisForm::quadratic}) {
      const HypothesisSpec spec = scenario_hypothesis(cfg, form);
      for (std::size_t cell = 0; cell < cfg.sizes.size(); ++cell) {
        for (std::size_t sim = 0; sim < 100; ++sim) {
          CovEstimate est = pooled_estimates(simulate_dataset(cfg, cell, sim));
          const double ats = statistic_value(StatisticKind::ats, est, spec);
          const double wts = statistic_value(StatisticKind::wts, est, spec);
          const double mats = statistic_value(StatisticKind::mats, est, spec);
          max_wts = std::max(max_wts, std::abs(wts - ats) / ats);
          max_mats = std::max(max_mats, std::abs(mats - ats) / ats);
          ++datasets;
        }
      }
    }
  }
  const bool wts_ok = max_wts <= 1e-10;
  const bool mats_ok = max_mats <= 1e-10;
  return {wts_ok && mats_ok,
          fmt("%zu datasets; max rel |WTS-ATS| = %.2e (%s), max rel |MATS-ATS| = %.2e (%s), tolerance 1e-10",
              datasets, max_wts, wts_ok ? "ok" : "exceeds", max_mats, mats_ok ? "ok" : "exceeds")};
}

Outcome criterion_5() {
  const std::vector<ErrorDistribution> dists{ErrorDistribution::standard_normal, ErrorDistribution::t9,
                                             ErrorDistribution::gamma21, ErrorDistribution::skew_normal4};
  double worst = 0.0;
  std::string report;
  for (auto s : {Scenario::A, Scenario::C, Scenario::D}) {
    double worst_s = 0.0;
    for (std::size_t sim = 0; sim < 200; ++sim) {
      SimConfig cfg = desk_scale(s);
      cfg.seed = kSeed;
      cfg.distribution = dists[sim % dists.size()];
      const Index total = std::vector<Index>{50, 100, 250}[sim % 3];
      cfg.sizes = {split_sizes(s, total)};
      CovEstimate est = pooled_estimates(simulate_dataset(cfg, 0, sim));
      const HypothesisSpec q = scenario_hypothesis(cfg, HypothesisForm::quadratic);
      const HypothesisSpec r = scenario_hypothesis(cfg, HypothesisForm::reduced);
      for (auto k : {StatisticKind::ats, StatisticKind::wts}) {
        const double a = statistic_value(k, est, q);
        const double b = statistic_value(k, est, r);
        worst_s = std::max(worst_s, std::abs(a - b) / std::max(std::abs(b), 1e-300));
      }
    }
    report += fmt("%s max rel diff %.2e; ", std::string(to_string(s)).c_str(), worst_s);
    worst = std::max(worst, worst_s);
  }
  return {worst <= 1e-8, report + "tolerance 1e-8 over 200 datasets per scenario"};
}

Outcome criterion_6() {
  SimConfig cfg = desk_scale(Scenario::A);
  cfg.sizes = {{300, 200}};
  cfg.seed = kSeed;
  const HypothesisSpec spec = scenario_hypothesis(cfg, cfg.form);
  const std::size_t n = 2000;

  // null law of the ATS from independent datasets 1..n
  std::vector<double> null_values(n);
  parallel_for(n, 0, [&](std::size_t i) {
    CovEstimate est = pooled_estimates(simulate_dataset(cfg, 0, i + 1));
    null_values[i] = statistic_value(StatisticKind::ats, est, spec);
  });

  const CovEstimate est = pooled_estimates(simulate_dataset(cfg, 0, 0));
  const StatisticKind kinds[] = {StatisticKind::ats};
  const ResamplingPlan plan{derive_seed(kSeed, {6}), 0};
  const double crit = ks_critical_1pct(static_cast<double>(n), static_cast<double>(n));
  bool ok = true;
  std::string report;
  for (CalibrationMethod m : {CalibrationMethod{ParametricBootstrap{n}}, CalibrationMethod{WildBootstrap{n}}}) {
    auto boot = calibrate(est, spec, kinds, m, plan).front().sorted_values();
    const double d = ks_two_sample(boot, null_values);
    ok = ok && d < crit;
    report += fmt("%s KS %.4f; ", std::string(method_name(m)).c_str(), d);
  }
  return {ok, report + fmt("1%% critical value %.4f", crit)};
}

// Cov(vech(e e^T)) from a large sample of mean-zero errors, accumulated directly
Matrix oracle_sigma(ErrorDistribution dist, const Matrix& root, std::size_t draws, std::uint64_t seed) {
  const Index d = root.rows();
  const Index p = vech_length(d);
  Vector sum = Vector::Zero(p);
  Matrix cross = Matrix::Zero(p, p);
  Rng rng(seed);
  const std::size_t chunk = 50000;
  for (std::size_t done = 0; done < draws; done += chunk) {
    const Index n = static_cast<Index>(std::min(chunk, draws - done));
    Matrix e = gen_errors(dist, d, n, rng) * root.transpose();
    Matrix w(p, n);
    for (Index k = 0; k < n; ++k) {
      Index idx = 0;
      for (Index r = 0; r < d; ++r)
        for (Index s = r; s < d; ++s) w(idx++, k) = e(k, r) * e(k, s);
    }
    sum += w.rowwise().sum();
    cross.noalias() += w * w.transpose();
  }
  const double m = static_cast<double>(draws);
  Vector mean = sum / m;
  return (cross - m * mean * mean.transpose()) / (m - 1.0);
}

Outcome criterion_7() {
  const Index d = 5;
  const SymMatrix v = CovStructure::ar(0.6).matrix(d);
  const Matrix root = psd_factor(v);
  bool ok = true;
  std::string report;
  for (auto dist : {ErrorDistribution::standard_normal, ErrorDistribution::gamma21}) {
    const Matrix truth = oracle_sigma(dist, root, 1000000, derive_seed(kSeed, {7, static_cast<std::uint64_t>(dist)}));
    std::vector<double> medians;
    for (Index n : {200, 800}) {
      std::vector<double> errs;
      for (std::uint64_t s = 0; s < 20; ++s) {
        Rng rng(derive_seed(kSeed, {7, static_cast<std::uint64_t>(dist), static_cast<std::uint64_t>(n), s}));
        Matrix x = gen_errors(dist, d, n, rng) * root.transpose();
        errs.push_back((fourth_moment_cov(GroupSample("g", x)).matrix() - truth).norm());
      }
      std::sort(errs.begin(), errs.end());
      medians.push_back(0.5 * (errs[9] + errs[10]));
    }
    ok = ok && medians[1] < medians[0];
    report += fmt("%s median error n=200 %.4f, n=800 %.4f; ", std::string(to_string(dist)).c_str(), medians[0],
                  medians[1]);
  }
  return {ok, report + "oracle from 1e6 draws, 20 seeds"};
}

Outcome criterion_8() {
  SimConfig cfg = desk_scale(Scenario::A);
  cfg.distribution = ErrorDistribution::skew_normal4;
  cfg.sizes = {{30, 20}};
  cfg.seed = kSeed;
  cfg.tests = {{StatisticKind::ats, ParametricBootstrap{500}},
               {StatisticKind::ats, WildBootstrap{500}},
               {StatisticKind::ats, MonteCarloChiSq{10000}}};

  SimConfig null_cfg = cfg;
  null_cfg.seed = kSeed + 1;  // independent type-I run
  const ScenarioResult null = type1_study(null_cfg);

  cfg.alternative = Alternative::one_point;
  cfg.deltas = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  const ScenarioResult power = power_study(cfg);

  bool ok = true;
  std::string report;
  for (const auto& cell : cfg.tests) {
    const std::string label = test_label(cell);
    const double r0 = power.find(label, cfg.sizes[0], 0.0)->rate;
    const double rn = null.find(label, cfg.sizes[0])->rate;
    bool mono = true;
    for (std::size_t k = 1; k < cfg.deltas.size(); ++k) {
      const auto* lo = power.find(label, cfg.sizes[0], cfg.deltas[k - 1]);
      const auto* hi = power.find(label, cfg.sizes[0], cfg.deltas[k]);
      const double slack = 2.0 * std::sqrt(lo->std_error * lo->std_error + hi->std_error * hi->std_error);
      mono = mono && hi->rate >= lo->rate - slack;
    }
    const double r3 = power.find(label, cfg.sizes[0], 3.0)->rate;
    const bool null_ok = std::abs(r0 - rn) <= 0.012;
    const bool top_ok = r3 > 0.9;
    ok = ok && null_ok && mono && top_ok;
    report += fmt("%s: delta0 %.4f vs null %.4f%s, monotone %s, delta3 %.4f%s; ", label.c_str(), r0, rn,
                  null_ok ? "" : " (off)", mono ? "yes" : "no", r3, top_ok ? "" : " (low)");
  }
  std::string curve = "ATS-Para curve:";
  for (double delta : cfg.deltas) curve += fmt(" %.4f", power.find("ATS-Para", cfg.sizes[0], delta)->rate);
  return {ok, report + curve};
}

Outcome criterion_9() {
  SimConfig cfg = desk_scale(Scenario::C);
  cfg.sizes = {{150, 100}};
  cfg.seed = kSeed;
  const HypothesisSpec spec = scenario_hypothesis(cfg, cfg.form);
  const std::size_t n = 2000;
  std::vector<double> p(n);
  parallel_for(n, 0, [&](std::size_t sim) {
    CovEstimate est = pooled_estimates(simulate_dataset(cfg, 0, sim));
    ResamplingPlan plan{derive_seed(cfg.seed, {0, sim, 1}), 1};
    p[sim] = run_test(est, spec, StatisticKind::ats, ParametricBootstrap{1000}, plan).p_value;
  });
  const double d = ks_uniform(p);
  const double crit = 1.628 / std::sqrt(static_cast<double>(n));
  std::size_t rejections = 0;
  for (double x : p) rejections += x <= 0.05;
  return {d < crit, fmt("KS %.4f vs 1%% critical value %.4f over %zu p-values (B = 1000), rejection rate at .05: %.4f",
                        d, crit, n, static_cast<double>(rejections) / static_cast<double>(n))};
}

Outcome criterion_10() {
  std::vector<std::string> failures;
  auto expect_equal = [&](const std::string& what, double a, double b) {
    if (!(a == b)) failures.push_back(what + fmt(" (%.17g vs %.17g)", a, b));
  };
  const std::vector<unsigned> thread_counts{1, 2, 3, 8};

  // single tests, every method
  SimConfig cfg = desk_scale(Scenario::A);
  cfg.sizes = {{30, 20}};
  cfg.seed = kSeed;
  CovEstimate est = pooled_estimates(simulate_dataset(cfg, 0, 0));
  const HypothesisSpec spec = scenario_hypothesis(cfg, cfg.form);
  std::vector<TestCell> cells = cfg.tests;
  cells.push_back({StatisticKind::mats, ParametricBootstrap{500}});
  cells.push_back({StatisticKind::mats, WildBootstrap{500, WildWeights::gaussian}});
  auto base = run_tests(est, spec, cells, {kSeed, 1});
  for (unsigned t : thread_counts) {
    auto other = run_tests(est, spec, cells, {kSeed, t});
    for (std::size_t i = 0; i < cells.size(); ++i) {
      expect_equal(test_label(cells[i]) + " value, threads " + std::to_string(t), base[i].value, other[i].value);
      expect_equal(test_label(cells[i]) + " p, threads " + std::to_string(t), base[i].p_value, other[i].p_value);
    }
  }

  // studies
  SimConfig study = cfg;
  study.n_sim = 300;
  study.tests = {{StatisticKind::ats, ParametricBootstrap{100}},
                 {StatisticKind::ats, WildBootstrap{100}},
                 {StatisticKind::ats, MonteCarloChiSq{1000}},
                 {StatisticKind::wts, ChiSquareAsymptotic{}}};
  study.threads = 1;
  const ScenarioResult t1 = type1_study(study);
  SimConfig power_cfg = study;
  power_cfg.alternative = Alternative::trend;
  power_cfg.deltas = {0.0, 1.5};
  const ScenarioResult pw = power_study(power_cfg);
  for (unsigned t : thread_counts) {
    study.threads = t;
    power_cfg.threads = t;
    const ScenarioResult t1b = type1_study(study);
    const ScenarioResult pwb = power_study(power_cfg);
    for (std::size_t i = 0; i < t1.rows.size(); ++i)
      expect_equal("type-I " + t1.rows[i].test + ", threads " + std::to_string(t), t1.rows[i].rate, t1b.rows[i].rate);
    for (std::size_t i = 0; i < pw.rows.size(); ++i)
      expect_equal("power " + pw.rows[i].test + ", threads " + std::to_string(t), pw.rows[i].rate, pwb.rows[i].rate);
  }

  // trace interval
  SimConfig one = desk_scale(Scenario::D);
  one.sizes = {{60}};
  one.seed = kSeed;
  const GroupSample sample = simulate_dataset(one, 0, 0).front();
  auto ci = trace_confidence_interval(sample, StatisticKind::ats, ParametricBootstrap{500}, 0.05, {kSeed, 1});
  for (unsigned t : thread_counts) {
    auto other = trace_confidence_interval(sample, StatisticKind::ats, ParametricBootstrap{500}, 0.05, {kSeed, t});
    expect_equal("interval lower, threads " + std::to_string(t), ci.lower, other.lower);
    expect_equal("interval upper, threads " + std::to_string(t), ci.upper, other.upper);
  }

  if (failures.empty())
    return {true, fmt("%zu test cells, type-I and power studies, trace interval; threads 1, 2, 3, 8 bit-identical",
                      cells.size())};
  std::string report = std::to_string(failures.size()) + " mismatches, first: " + failures.front();
  return {false, report};
}

Outcome criterion_11() {
  TimingConfig tc;
  tc.base = desk_scale(Scenario::D);
  tc.base.sizes = {{125}};
  tc.base.seed = kSeed;
  tc.base.tests = {{StatisticKind::ats, ParametricBootstrap{1000}}};
  tc.dims = {10, 20};
  tc.repetitions = 3;
  auto rows = timing_study(tc, HypothesisForm::reduced, HypothesisForm::quadratic);
  bool ok = true;
  std::string report;
  for (const auto& r : rows) {
    ok = ok && r.ratio <= 0.5;
    report += fmt("d=%ld reduced %.4f s, quadratic %.4f s, ratio %.4f; ", static_cast<long>(r.d), r.numerator_seconds,
                  r.denominator_seconds, r.ratio);
  }
  return {ok, report + "required ratio <= 0.5"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion> kCriteria{
    {1, "scenario A ATS-Para type-I rate, n=(150,100)", criterion_1},
    {2, "scenario A WTS-chisq liberality, n=(30,20)", criterion_2},
    {3, "scenario B ATS-Para type-I rate, n=25", criterion_3},
    {4, "rank-1 hypothesis: ATS == WTS == MATS", criterion_4},
    {5, "quadratic vs reduced form invariance", criterion_5},
    {6, "bootstrap vs null distribution (KS)", criterion_6},
    {7, "fourth-moment estimator consistency", criterion_7},
    {8, "power curve sanity, one-point alternative", criterion_8},
    {9, "p-value uniformity (KS)", criterion_9},
    {10, "determinism across thread counts", criterion_10},
    {11, "reduced-form speedup, scenario D", criterion_11},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  bool all_pass = true;
  for (const auto& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << c.id << " [" << c.name << "]: " << (o.pass ? "PASS" : "FAIL") << " | " << o.detail
              << " | " << fmt("%.1f s", secs) << std::endl;
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
