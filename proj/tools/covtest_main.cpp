// covtest: tests of linear hypotheses about group covariance matrices.
//
//   covtest test     --data FILE [--hypothesis NAME|JSON] [--statistic ats,wts] [--method param] ...
//   covtest ci       --data FILE [--statistic ats] [--method param] [--alpha 0.05] ...
//   covtest simulate --config FILE [--out FILE] [--format text|csv]
//   covtest generate --config FILE [--cell 0] [--sim 0] [--delta 0] [--out FILE]

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "covtest/io.hpp"

using namespace covtest;

namespace {

struct Common {
  std::string data;
  std::string group_col = "group";
  std::string statistic = "ats";
  std::string method = "param";
  std::size_t B = 1000;
  std::size_t M = 10000;
  std::string weights = "rademacher";
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;
  std::string format = "text";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--data", c.data, "CSV file, header row, one observation per row")->required();
  cmd->add_option("--group-col", c.group_col, "name of the group label column")->capture_default_str();
  cmd->add_option("--statistic", c.statistic, "ats, wts, mats (comma separated)")->capture_default_str();
  cmd->add_option("--method", c.method, "param, wild, mc, chisq")->capture_default_str();
  cmd->add_option("--B", c.B, "bootstrap replicates")->capture_default_str();
  cmd->add_option("--M", c.M, "Monte Carlo draws")->capture_default_str();
  cmd->add_option("--weights", c.weights, "wild bootstrap weights: rademacher, gaussian")->capture_default_str();
  cmd->add_option("--seed", c.seed, "master seed")->capture_default_str();
  cmd->add_option("--threads", c.threads, "worker threads, 0 = all cores")->capture_default_str();
  cmd->add_option("--out", c.out, "write the report here instead of stdout");
  cmd->add_option("--format", c.format, "text, csv, json-lines")->capture_default_str();
}

std::vector<StatisticKind> parse_kinds(const std::string& list) {
  std::vector<StatisticKind> kinds;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) kinds.push_back(parse_statistic(item));
  }
  if (kinds.empty()) throw Error(ErrorCode::ConfigError, "no statistic requested");
  return kinds;
}

WildWeights parse_weights(const std::string& s) {
  if (s == "rademacher") return WildWeights::rademacher;
  if (s == "gaussian") return WildWeights::gaussian;
  throw Error(ErrorCode::ConfigError, "unknown wild weights '" + s + "'");
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path);
  out << text;
}

std::string read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cmd_test(const Common& c, const HypothesisRequest& req, std::optional<double> alpha) {
  auto groups = ingest(c.data, c.group_col);
  CovEstimate est = pooled_estimates(groups);
  HypothesisSpec spec = resolve_hypothesis(req, est.group_count(), est.dim);
  const auto method = parse_method(c.method, c.B, c.M, parse_weights(c.weights));
  std::vector<TestCell> cells;
  for (auto k : parse_kinds(c.statistic)) cells.push_back({k, method});
  auto results = run_tests(est, spec, cells, ResamplingPlan{c.seed, c.threads}, alpha);
  emit(format_results(results, parse_format(c.format)), c.out);
  return 0;
}

int cmd_ci(const Common& c, double alpha) {
  auto groups = ingest(c.data, c.group_col);
  if (groups.size() != 1)
    throw Error(ErrorCode::BadGroupCount, "ci needs exactly one group, data has " + std::to_string(groups.size()));
  auto kinds = parse_kinds(c.statistic);
  const auto method = parse_method(c.method, c.B, c.M, parse_weights(c.weights));
  ResamplingPlan plan{c.seed, c.threads};
  TraceInterval ci = trace_confidence_interval(groups.front(), kinds.front(), method, alpha, plan);
  TestResult meta;
  meta.kind = kinds.front();
  meta.method = std::string(method_name(method));
  meta.replicates = method_size(method);
  meta.seed = c.seed;
  emit(format_interval(ci, meta, alpha, parse_format(c.format)), c.out);
  return 0;
}

int cmd_simulate(const std::string& config, std::optional<std::uint64_t> seed, std::optional<unsigned> threads,
                 const std::string& out, const std::string& format) {
  StudyRequest req = parse_study_request(read_config(config));
  if (seed) req.config.seed = *seed;
  if (threads) req.config.threads = *threads;
  const bool csv = format == "csv";
  std::ostringstream os;
  switch (req.kind) {
    case StudyRequest::Kind::type1:
    case StudyRequest::Kind::power: {
      ScenarioResult res =
          req.kind == StudyRequest::Kind::type1 ? type1_study(req.config) : power_study(req.config);
      if (csv) write_result_csv(res, os);
      else os << format_result_table(res);
      break;
    }
    case StudyRequest::Kind::timing: {
      TimingConfig tc{req.config, req.timing_dims, req.timing_repetitions};
      if (tc.dims.empty()) tc.dims = {req.config.d};
      auto rows = timing_study(tc, HypothesisForm::reduced, HypothesisForm::quadratic);
      if (csv) {
        os << "test,d,reduced_seconds,quadratic_seconds,ratio\n";
        for (const auto& r : rows)
          os << r.test << ',' << r.d << ',' << r.numerator_seconds << ',' << r.denominator_seconds << ',' << r.ratio
             << '\n';
      } else {
        os << format_timing_table(rows);
      }
      break;
    }
  }
  emit(os.str(), out);
  return 0;
}

int cmd_generate(const std::string& config, std::size_t cell, std::size_t sim, double delta, const std::string& out,
                 const std::string& group_col) {
  SimConfig cfg = parse_sim_config(read_config(config));
  auto groups = simulate_dataset(cfg, cell, sim, delta);
  std::ostringstream os;
  export_csv(groups, os, group_col);
  emit(os.str(), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tests of linear hypotheses about covariance matrices"};
  app.require_subcommand(1);

  Common test_opts;
  std::string hypothesis = "equal_covariances";
  std::string form;
  std::optional<double> gamma;
  std::optional<Index> levels_b;
  std::optional<double> test_alpha;
  auto* test = app.add_subcommand("test", "test a hypothesis on grouped CSV data");
  add_common(test, test_opts);
  test->add_option("--hypothesis", hypothesis, "catalog name, JSON object or .json file")->capture_default_str();
  test->add_option("--form", form, "quadratic, reduced, row_embedded");
  test->add_option("--gamma", gamma, "target trace for given_trace");
  test->add_option("--levels-b", levels_b, "levels of the second factor for two-way hypotheses");
  test->add_option("--alpha", test_alpha, "also report the bootstrap critical value at this level");

  Common ci_opts;
  double ci_alpha = 0.05;
  auto* ci = app.add_subcommand("ci", "confidence interval for the trace of one group's covariance");
  add_common(ci, ci_opts);
  ci->add_option("--alpha", ci_alpha, "1 - confidence level")->capture_default_str();

  std::string sim_config;
  std::optional<std::uint64_t> sim_seed;
  std::optional<unsigned> sim_threads;
  std::string sim_out;
  std::string sim_format = "text";
  auto* simulate = app.add_subcommand("simulate", "run a type-I error, power or timing study");
  simulate->add_option("--config", sim_config, "JSON study description")->required();
  simulate->add_option("--seed", sim_seed, "override the config seed");
  simulate->add_option("--threads", sim_threads, "override the config thread count");
  simulate->add_option("--out", sim_out, "write the table here instead of stdout");
  simulate->add_option("--format", sim_format, "text or csv")->capture_default_str();

  std::string gen_config;
  std::size_t gen_cell = 0;
  std::size_t gen_sim = 0;
  double gen_delta = 0.0;
  std::string gen_out;
  std::string gen_group_col = "group";
  auto* generate = app.add_subcommand("generate", "write one simulated dataset as CSV");
  generate->add_option("--config", gen_config, "JSON study description")->required();
  generate->add_option("--cell", gen_cell, "size cell index")->capture_default_str();
  generate->add_option("--sim", gen_sim, "simulation index")->capture_default_str();
  generate->add_option("--delta", gen_delta, "alternative strength")->capture_default_str();
  generate->add_option("--group-col", gen_group_col, "name of the group label column")->capture_default_str();
  generate->add_option("--out", gen_out, "write here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*test) {
      HypothesisRequest req{hypothesis, std::nullopt, gamma, levels_b};
      if (!form.empty()) req.form = parse_form(form);
      return cmd_test(test_opts, req, test_alpha);
    }
    if (*ci) return cmd_ci(ci_opts, ci_alpha);
    if (*simulate) return cmd_simulate(sim_config, sim_seed, sim_threads, sim_out, sim_format);
    if (*generate) return cmd_generate(gen_config, gen_cell, gen_sim, gen_delta, gen_out, gen_group_col);
  } catch (const Error& e) {
    std::cerr << "covtest: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "covtest: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
