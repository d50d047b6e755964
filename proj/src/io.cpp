#include "covtest/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

namespace covtest {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(b, e - b + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
      cur.push_back(ch);
    } else if (ch == ',' && !quoted) {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

std::string location(std::string_view source, std::size_t row, std::size_t col) {
  std::ostringstream os;
  os << source << ": row " << row << ", column " << col;
  return os.str();
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

Matrix matrix_from_json(const json& j, std::string_view what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ConfigError, std::string(what) + " must be a non-empty array of rows");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw Error(ErrorCode::DimensionMismatch, std::string(what) + " rows have different lengths");
    for (Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

Vector vector_from_json(const json& j, std::string_view what) {
  if (!j.is_array()) throw Error(ErrorCode::ConfigError, std::string(what) + " must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string(what) + ": " + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string fmt_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string fmt_fixed(double x, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

std::string sizes_label(const std::vector<Index>& sizes) {
  std::string s;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) s += "/";
    s += std::to_string(sizes[i]);
  }
  return s;
}

}  // namespace

// ------------------------------------------------------------------ ingest

std::vector<GroupSample> ingest(std::istream& in, std::string_view group_column, std::string_view source) {
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    header = split_csv_line(line);
  }
  if (header.empty()) throw Error(ErrorCode::ParseError, std::string(source) + ": empty file");
  std::size_t group_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == group_column) group_col = c;
  if (group_col == header.size())
    throw Error(ErrorCode::ParseError, std::string(source) + ": no column named '" + std::string(group_column) + "'");
  const std::size_t d = header.size() - 1;
  if (d == 0) throw Error(ErrorCode::ParseError, std::string(source) + ": no numeric columns");

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::vector<double>>> rows_by_group;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::DimensionMismatch, location(source, row, cells.size()) + ": expected " +
                                                    std::to_string(header.size()) + " cells, found " +
                                                    std::to_string(cells.size()));
    }
    std::vector<double> values;
    values.reserve(d);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == group_col) continue;
      double v = 0.0;
      if (!parse_double(cells[c], v))
        throw Error(ErrorCode::ParseError, location(source, row, c + 1) + ": '" + cells[c] + "' is not a finite number");
      values.push_back(v);
    }
    const std::string& label = cells[group_col];
    if (label.empty()) throw Error(ErrorCode::ParseError, location(source, row, group_col + 1) + ": empty group label");
    auto [it, inserted] = rows_by_group.try_emplace(label);
    if (inserted) order.push_back(label);
    it->second.push_back(std::move(values));
  }

  std::vector<GroupSample> groups;
  for (const auto& label : order) {
    const auto& rows = rows_by_group[label];
    if (rows.size() < 2)
      throw Error(ErrorCode::GroupTooSmall, std::string(source) + ": group '" + label + "' has " +
                                                std::to_string(rows.size()) + " row(s); need at least 2");
    Matrix x(static_cast<Index>(rows.size()), static_cast<Index>(d));
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < d; ++c) x(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    groups.emplace_back(label, std::move(x));
  }
  if (groups.empty()) throw Error(ErrorCode::ParseError, std::string(source) + ": no data rows");
  return groups;
}

std::vector<GroupSample> ingest(const std::filesystem::path& path, std::string_view group_column) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  return ingest(in, group_column, path.string());
}

void export_csv(const std::vector<GroupSample>& groups, std::ostream& out, std::string_view group_column) {
  if (groups.empty()) return;
  out << group_column;
  for (Index j = 0; j < groups.front().dim(); ++j) out << ",x" << (j + 1);
  out << '\n';
  for (const auto& g : groups) {
    for (Index k = 0; k < g.size(); ++k) {
      out << g.id();
      for (Index j = 0; j < g.dim(); ++j) out << ',' << fmt_double(g.observations()(k, j));
      out << '\n';
    }
  }
}

// -------------------------------------------------------------- hypotheses

HypothesisSpec resolve_hypothesis(const HypothesisRequest& req, Index a, Index d) {
  json j;
  const std::string text = trim(req.text);
  if (!text.empty() && text.front() == '{') {
    j = parse_json(text, "hypothesis");
  } else if (text.size() > 5 && text.ends_with(".json")) {
    j = parse_json(read_file(text), text);
  } else {
    j = json{{"name", text}};
  }

  if (j.contains("C")) {
    Matrix C = matrix_from_json(j.at("C"), "C");
    Vector zeta = j.contains("zeta") ? vector_from_json(j.at("zeta"), "zeta") : Vector::Zero(C.rows());
    return custom_hypothesis(std::move(C), std::move(zeta), a, d);
  }

  const std::string name = j.value("name", std::string());
  auto form_or = [&](HypothesisForm fallback) {
    if (req.form) return *req.form;
    if (j.contains("form")) return parse_form(j.at("form").get<std::string>());
    return fallback;
  };
  HypothesisSpec spec;
  if (name == "equal_covariances") {
    spec = equal_covariances(a, d, form_or(HypothesisForm::quadratic));
  } else if (name == "given_covariance") {
    if (!j.contains("sigma0")) throw Error(ErrorCode::ConfigError, "given_covariance needs a sigma0 matrix");
    spec = given_covariance(SymMatrix(matrix_from_json(j.at("sigma0"), "sigma0")));
  } else if (name == "equal_diagonal") {
    spec = equal_diagonal(d, form_or(HypothesisForm::quadratic));
  } else if (name == "equal_traces") {
    spec = equal_traces(a, d, form_or(HypothesisForm::quadratic));
  } else if (name == "given_trace") {
    std::optional<double> gamma = req.gamma;
    if (!gamma && j.contains("gamma")) gamma = j.at("gamma").get<double>();
    if (!gamma) throw Error(ErrorCode::ConfigError, "given_trace needs gamma");
    spec = given_trace(d, *gamma, form_or(HypothesisForm::reduced));
  } else if (name == "twoway_main_a" || name == "twoway_interaction") {
    std::optional<Index> b = req.levels_b;
    if (!b && j.contains("b")) b = j.at("b").get<Index>();
    if (!b || *b < 1 || a % *b != 0)
      throw Error(ErrorCode::DimensionMismatch, "two-way layouts need b levels dividing the group count");
    spec = twoway_trace_effects(a / *b, *b, d, name == "twoway_main_a" ? TwoWayEffect::main_a : TwoWayEffect::interaction);
  } else {
    throw Error(ErrorCode::ConfigError, "unknown hypothesis '" + name + "'");
  }
  validate(spec, a, d);
  if (spec.groups != a)
    throw Error(ErrorCode::DimensionMismatch, "hypothesis '" + name + "' expects " + std::to_string(spec.groups) +
                                                  " group(s), data has " + std::to_string(a));
  return spec;
}

TestCell parse_test_cell(std::string_view text, std::size_t B, std::size_t M, WildWeights weights) {
  auto dash = text.find('-');
  if (dash == std::string_view::npos)
    throw Error(ErrorCode::ConfigError, "test '" + std::string(text) + "' must look like 'ats-param'");
  return {parse_statistic(text.substr(0, dash)), parse_method(text.substr(dash + 1), B, M, weights)};
}

// ------------------------------------------------------------ sim configs

namespace {

SimConfig sim_config_from_json(const json& j) {
  const std::string scenario = j.value("scenario", std::string("A"));
  SimConfig cfg = desk_scale(parse_scenario(scenario));
  if (j.value("full_scale", false)) {
    cfg.n_sim = 20000;
  }
  const std::size_t B = j.value("B", j.value("full_scale", false) ? std::size_t{1000} : std::size_t{500});
  const std::size_t M = j.value("M", std::size_t{10000});
  const WildWeights weights =
      j.value("wild_weights", std::string("rademacher")) == "gaussian" ? WildWeights::gaussian : WildWeights::rademacher;

  cfg.form = parse_form(j.value("form", std::string("quadratic")));
  cfg.d = j.value("d", Index{5});
  cfg.n_sim = j.value("n_sim", cfg.n_sim);
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.threads = j.value("threads", 0u);
  cfg.distribution = parse_distribution(j.value("distribution", std::string("normal")));

  if (j.contains("covariance")) {
    const auto& c = j.at("covariance");
    const std::string type = c.value("type", std::string("ar"));
    if (type == "ar") cfg.covariance = CovStructure::ar(c.value("rho", 0.6));
    else if (type == "cs") cfg.covariance = CovStructure::compound_symmetry();
    else if (type == "explicit") cfg.covariance = CovStructure::given(SymMatrix(matrix_from_json(c.at("matrix"), "covariance.matrix")));
    else throw Error(ErrorCode::ConfigError, "unknown covariance type '" + type + "'");
  }

  if (j.contains("hypothesis")) {
    const auto& h = j.at("hypothesis");
    Matrix C = matrix_from_json(h.at("C"), "hypothesis.C");
    Vector zeta = h.contains("zeta") ? vector_from_json(h.at("zeta"), "hypothesis.zeta") : Vector::Zero(C.rows());
    cfg.custom = custom_hypothesis(std::move(C), std::move(zeta), h.at("groups").get<Index>(), cfg.d);
  }
  if (j.contains("gamma")) cfg.gamma = j.at("gamma").get<double>();

  if (j.contains("sizes")) {
    for (const auto& cell : j.at("sizes")) cfg.sizes.push_back(cell.get<std::vector<Index>>());
  }
  if (j.contains("total_sizes")) {
    for (const auto& n : j.at("total_sizes")) cfg.sizes.push_back(split_sizes(cfg.scenario, n.get<Index>()));
  }
  if (j.contains("means")) {
    for (const auto& m : j.at("means")) cfg.means.push_back(vector_from_json(m, "means"));
  }
  if (j.contains("tests")) {
    cfg.tests.clear();
    for (const auto& t : j.at("tests")) cfg.tests.push_back(parse_test_cell(t.get<std::string>(), B, M, weights));
  } else {
    for (auto& t : cfg.tests) {
      if (auto* p = std::get_if<ParametricBootstrap>(&t.method)) p->replicates = B;
      if (auto* w = std::get_if<WildBootstrap>(&t.method)) *w = WildBootstrap{B, weights};
      if (auto* m = std::get_if<MonteCarloChiSq>(&t.method)) m->draws = M;
    }
  }
  if (j.contains("alternative")) {
    const auto& a = j.at("alternative");
    if (a.is_string()) {
      cfg.alternative = parse_alternative(a.get<std::string>());
    } else {
      cfg.alternative = parse_alternative(a.value("type", std::string("none")));
      if (a.contains("deltas")) cfg.deltas = a.at("deltas").get<std::vector<double>>();
    }
  }
  return cfg;
}

}  // namespace

SimConfig parse_sim_config(std::string_view json_text) {
  try {
    return sim_config_from_json(parse_json(json_text, "simulation config"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("simulation config: ") + e.what());
  }
}

SimConfig load_sim_config(const std::filesystem::path& path) { return parse_sim_config(read_file(path)); }

StudyRequest parse_study_request(std::string_view json_text) {
  StudyRequest req;
  req.config = parse_sim_config(json_text);
  json j = parse_json(json_text, "simulation config");
  const std::string study = j.value("study", std::string(req.config.alternative == Alternative::none ? "type1" : "power"));
  if (study == "type1") req.kind = StudyRequest::Kind::type1;
  else if (study == "power") req.kind = StudyRequest::Kind::power;
  else if (study == "timing") req.kind = StudyRequest::Kind::timing;
  else throw Error(ErrorCode::ConfigError, "unknown study '" + study + "'");
  if (j.contains("timing_dims")) req.timing_dims = j.at("timing_dims").get<std::vector<Index>>();
  req.timing_repetitions = j.value("timing_repetitions", req.timing_repetitions);
  return req;
}

// ---------------------------------------------------------------- reports

OutputFormat parse_format(std::string_view s) {
  if (s == "text") return OutputFormat::text;
  if (s == "csv") return OutputFormat::csv;
  if (s == "json-lines" || s == "jsonl") return OutputFormat::jsonl;
  throw Error(ErrorCode::ConfigError, "unknown output format '" + std::string(s) + "'");
}

std::string format_results(const std::vector<TestResult>& results, OutputFormat fmt) {
  std::ostringstream os;
  switch (fmt) {
    case OutputFormat::jsonl:
      for (const auto& r : results) {
        json line{{"statistic", std::string(to_string(r.kind))},
                  {"value", r.value},
                  {"p", r.p_value},
                  {"method", r.method},
                  {"B", r.replicates},
                  {"seed", r.seed},
                  {"warnings", r.warnings}};
        if (r.degrees_of_freedom) line["df"] = *r.degrees_of_freedom;
        if (r.critical_value) line["critical_value"] = *r.critical_value;
        os << line.dump() << '\n';
      }
      break;
    case OutputFormat::csv:
      os << "statistic,value,p,method,B,seed,critical_value,warnings\n";
      for (const auto& r : results) {
        os << to_string(r.kind) << ',' << fmt_double(r.value) << ',' << fmt_double(r.p_value) << ',' << r.method << ','
           << r.replicates << ',' << r.seed << ',' << (r.critical_value ? fmt_double(*r.critical_value) : "") << ',';
        std::string w;
        for (const auto& s : r.warnings) w += (w.empty() ? "" : "; ") + s;
        os << '"' << w << "\"\n";
      }
      break;
    case OutputFormat::text:
      for (const auto& r : results) {
        os << to_string(r.kind) << " (" << r.method;
        if (r.replicates) os << ", " << r.replicates << (r.method == "mc" ? " draws" : " replicates");
        if (r.degrees_of_freedom) os << ", df " << *r.degrees_of_freedom;
        os << ", seed " << r.seed << ")\n";
        os << "  statistic = " << std::setprecision(10) << r.value << "\n";
        os << "  p-value   = " << std::setprecision(6) << r.p_value << "\n";
        if (r.critical_value) os << "  critical  = " << std::setprecision(10) << *r.critical_value << "\n";
        for (const auto& w : r.warnings) os << "  warning: " << w << "\n";
      }
      break;
  }
  return os.str();
}

std::string format_interval(const TraceInterval& ci, const TestResult& meta, double alpha, OutputFormat fmt) {
  std::ostringstream os;
  switch (fmt) {
    case OutputFormat::jsonl:
      os << json{{"estimate", ci.estimate},      {"lower", ci.lower},       {"upper", ci.upper},
                 {"alpha", alpha},               {"statistic", std::string(to_string(meta.kind))},
                 {"method", meta.method},        {"B", meta.replicates},    {"seed", meta.seed},
                 {"warnings", ci.warnings}}
                .dump()
         << '\n';
      break;
    case OutputFormat::csv:
      os << "estimate,lower,upper,alpha,statistic,method,B,seed\n"
         << fmt_double(ci.estimate) << ',' << fmt_double(ci.lower) << ',' << fmt_double(ci.upper) << ',' << alpha << ','
         << to_string(meta.kind) << ',' << meta.method << ',' << meta.replicates << ',' << meta.seed << '\n';
      break;
    case OutputFormat::text:
      os << "trace estimate = " << std::setprecision(10) << ci.estimate << "\n"
         << (1.0 - alpha) * 100.0 << "% interval = (" << ci.lower << ", " << ci.upper << ")\n"
         << "  " << to_string(meta.kind) << " / " << meta.method << ", seed " << meta.seed << "\n";
      for (const auto& w : ci.warnings) os << "  warning: " << w << "\n";
      break;
  }
  return os.str();
}

void write_result_csv(const ScenarioResult& result, std::ostream& out) {
  out << "test,sizes,delta,rate,std_error,n_sim,seconds\n";
  for (const auto& r : result.rows) {
    out << r.test << ',' << sizes_label(r.sizes) << ',' << r.delta << ',' << fmt_fixed(r.rate, 4) << ','
        << fmt_fixed(r.std_error, 4) << ',' << r.n_sim << ',' << fmt_fixed(r.seconds, 2) << '\n';
  }
}

std::string format_result_table(const ScenarioResult& result) {
  // columns: distinct (sizes, delta) in first-seen order
  std::vector<std::pair<std::vector<Index>, double>> columns;
  std::vector<std::string> tests;
  for (const auto& r : result.rows) {
    std::pair<std::vector<Index>, double> key{r.sizes, r.delta};
    if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
    if (std::find(tests.begin(), tests.end(), r.test) == tests.end()) tests.push_back(r.test);
  }
  bool show_delta = false;
  for (const auto& c : columns) show_delta |= c.second != 0.0;

  std::vector<std::string> heads;
  for (const auto& c : columns) {
    std::string h = sizes_label(c.first);
    if (show_delta) h += " d=" + fmt_fixed(c.second, 2);
    heads.push_back(h);
  }
  std::size_t first_width = 10;
  for (const auto& t : tests) first_width = std::max(first_width, t.size());
  std::vector<std::size_t> widths;
  for (const auto& h : heads) widths.push_back(std::max<std::size_t>(h.size(), 6));

  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(first_width)) << "test";
  for (std::size_t c = 0; c < heads.size(); ++c) os << " | " << std::right << std::setw(static_cast<int>(widths[c])) << heads[c];
  os << '\n' << std::string(first_width, '-');
  for (auto w : widths) os << "-+-" << std::string(w, '-');
  os << '\n';
  for (const auto& t : tests) {
    os << std::left << std::setw(static_cast<int>(first_width)) << t;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const ResultRow* row = result.find(t, columns[c].first, columns[c].second);
      std::string cell = row ? fmt_fixed(row->rate, 4) : "";
      if (cell.rfind("0.", 0) == 0) cell = cell.substr(1);
      os << " | " << std::right << std::setw(static_cast<int>(widths[c])) << cell;
    }
    os << '\n';
  }
  return os.str();
}

std::string format_timing_table(const std::vector<TimingRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "test" << std::right << std::setw(5) << "d" << std::setw(14) << "num [s]"
     << std::setw(14) << "den [s]" << std::setw(10) << "ratio" << '\n';
  for (const auto& r : rows) {
    os << std::left << std::setw(12) << r.test << std::right << std::setw(5) << r.d << std::setw(14)
       << fmt_fixed(r.numerator_seconds, 5) << std::setw(14) << fmt_fixed(r.denominator_seconds, 5) << std::setw(10)
       << fmt_fixed(r.ratio, 4) << '\n';
  }
  return os.str();
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::GroupTooSmall:
    case ErrorCode::TooFewObservations:
      return 3;
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonTriangularLength:
    case ErrorCode::BadGroupCount:
    case ErrorCode::BadDimension:
    case ErrorCode::NotSymmetric:
    case ErrorCode::UnsupportedCombination:
      return 4;
    case ErrorCode::ConfigError:
    case ErrorCode::EmptyList:
      return 2;
    default:
      return 5;
  }
}

}  // namespace covtest
