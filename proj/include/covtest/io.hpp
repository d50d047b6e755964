#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "covtest/error.hpp"
#include "covtest/simulate.hpp"

namespace covtest {

/// Reads a header-first CSV with one observation per row. `group_column`
/// names the label column; every other column is numeric. Groups come back in
/// order of first appearance. Errors: ParseError (with 1-based row/column),
/// DimensionMismatch (ragged rows), GroupTooSmall (fewer than 2 rows).
std::vector<GroupSample> ingest(const std::filesystem::path& path, std::string_view group_column);
std::vector<GroupSample> ingest(std::istream& in, std::string_view group_column, std::string_view source = "<stream>");

/// Writes groups in the layout ingest() reads, with values printed to full
/// double precision so re-ingesting is lossless.
void export_csv(const std::vector<GroupSample>& groups, std::ostream& out, std::string_view group_column = "group");

/// Catalog name ("equal_covariances", "given_trace", ...), a JSON object
/// {"name": ..., params} or an explicit {"C": [[...]], "zeta": [...]}.
/// Missing parameters fall back to the data dimensions (a, d).
struct HypothesisRequest {
  std::string text;  // name or JSON
  std::optional<HypothesisForm> form;
  std::optional<double> gamma;
  std::optional<Index> levels_b;
};
HypothesisSpec resolve_hypothesis(const HypothesisRequest& req, Index a, Index d);

/// "ats-param", "wts-chisq", ...
TestCell parse_test_cell(std::string_view text, std::size_t B, std::size_t M,
                         WildWeights weights = WildWeights::rademacher);

SimConfig parse_sim_config(std::string_view json_text);
SimConfig load_sim_config(const std::filesystem::path& path);

/// Power studies and timing studies need the extra fields in the config.
struct StudyRequest {
  enum class Kind { type1, power, timing };
  Kind kind = Kind::type1;
  SimConfig config;
  std::vector<Index> timing_dims;
  std::size_t timing_repetitions = 3;
};
StudyRequest parse_study_request(std::string_view json_text);

enum class OutputFormat { text, csv, jsonl };
OutputFormat parse_format(std::string_view s);

std::string format_results(const std::vector<TestResult>& results, OutputFormat fmt);
std::string format_interval(const TraceInterval& ci, const TestResult& meta, double alpha, OutputFormat fmt);

/// One line per row: test,sizes,delta,rate,std_error,n_sim,seconds.
void write_result_csv(const ScenarioResult& result, std::ostream& out);
/// Aligned table with tests as rows and size cells (or deltas) as columns.
std::string format_result_table(const ScenarioResult& result);
std::string format_timing_table(const std::vector<TimingRow>& rows);

/// CLI exit code for an error category.
int exit_code_for(ErrorCode code);

}  // namespace covtest
