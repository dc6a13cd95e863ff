// SPDX-License-Identifier: Apache-2.0
//
// Experiment runners behind the CLI subcommands. Each runner writes its
// artifacts under cfg.out_dir and returns the summary rows it wrote to
// summary.csv (and summary.json when the format is json).
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "csifb/harness/config.hpp"

namespace csifb {

struct ReportRow {
  std::string scheme;
  double n_bits = 0.0;  // mean bits for variable-overhead schemes
  double rho = 0.0;     // NaN when not applicable
  long long params = -1;  // -1 when not applicable
  long long flops = -1;
  double wall_seconds = 0.0;
};

inline constexpr const char* kReportHeader = "scheme,n_bits,rho,params,flops,wall_seconds";

std::string rows_csv(const std::vector<ReportRow>& rows);
std::string rows_json(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_rows_csv(const std::string& text);
/// Same row except for wall time.
bool same_result(const ReportRow& a, const ReportRow& b);

void write_summary(const std::filesystem::path& dir, const std::vector<ReportRow>& rows, ReportFormat format);
std::vector<ReportRow> read_summary(const std::filesystem::path& dir);

struct GenOutput {
  DatasetFiles files;
  std::vector<std::pair<std::filesystem::path, std::string>> digests;
  SplitCounts counts;
};

GenOutput run_gen(const ExperimentConfig& cfg);
/// Per-sample rows in <out>/type1_samples.csv.
std::vector<ReportRow> run_eval_type1(const ExperimentConfig& cfg);
/// Per-sample rows in <out>/type2_samples.csv.
std::vector<ReportRow> run_eval_type2(const ExperimentConfig& cfg);
/// Trains every model variant; writes <tag>.ckpt and <tag>_history.csv.
/// Returns the rows of the trained models on the test split.
std::vector<ReportRow> run_train(const ExperimentConfig& cfg, std::ostream* log = nullptr);
/// Evaluates the stored checkpoints of every variant on the test split.
std::vector<ReportRow> run_eval_nn(const ExperimentConfig& cfg);
/// Per-layer tables in <out>/complexity_<tag>.csv; rows without rho.
std::vector<ReportRow> run_complexity(const ExperimentConfig& cfg);
/// Concatenates the summaries of the run directories.
std::vector<ReportRow> run_report(const std::vector<std::filesystem::path>& runs,
                                  const std::filesystem::path& out, ReportFormat format);

/// arch/quantizer, then /wdN for reduced widths and /stochastic when
/// binarization stays stochastic at evaluation.
std::string scheme_name(const nn::ModelSpec& spec, bool stochastic_eval = false);
std::string type2_scheme_name(const Type2Config& cfg);

}  // namespace csifb
