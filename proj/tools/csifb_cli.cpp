// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "csifb/errors.hpp"
#include "csifb/harness/config.hpp"
#include "csifb/harness/experiment.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config,--scene", c.config, "experiment config file")->required();
  cmd->add_option("--seed", c.seed, "master seed (overrides [experiment] seed)");
  cmd->add_option("--out", c.out, "output directory (overrides [experiment] out)");
}

csifb::ExperimentConfig resolve(const Common& c) {
  csifb::ExperimentConfig cfg = csifb::load_config(c.config);
  if (c.seed) cfg.set_seed(*c.seed);
  if (!c.out.empty()) cfg.out_dir = c.out;
  return cfg;
}

void print_rows(const std::vector<csifb::ReportRow>& rows) { std::cout << csifb::rows_csv(rows); }

int exit_code(const std::string& cls) {
  if (cls == "config_error") return 2;
  if (cls == "io_error") return 3;
  if (cls == "contract_error") return 4;
  if (cls == "domain_error") return 5;
  if (cls == "degenerate_input") return 6;
  return 1;
}

std::string one_line(std::string s) {
  for (char& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Implicit CSI feedback experiments: datasets, codebook baselines, learned feedback"};
  app.require_subcommand(1);

  Common gen_opts, t1_opts, t2_opts, train_opts, eval_opts, cx_opts;
  std::optional<std::uint64_t> count;
  bool quiet = false;

  auto* gen = app.add_subcommand("gen", "synthesize train/val/test datasets");
  add_common(gen, gen_opts);
  gen->add_option("--count", count, "total sample count (overrides [dataset] count)");
  auto* t1 = app.add_subcommand("eval-type1", "Type I codebook baseline on the test split");
  add_common(t1, t1_opts);
  auto* t2 = app.add_subcommand("eval-type2", "Type II codebook baseline on the test split");
  add_common(t2, t2_opts);
  auto* tr = app.add_subcommand("train", "train every configured model");
  add_common(tr, train_opts);
  tr->add_flag("--quiet", quiet, "suppress progress output");
  auto* ev = app.add_subcommand("eval-nn", "evaluate stored checkpoints on the test split");
  add_common(ev, eval_opts);
  auto* cx = app.add_subcommand("complexity", "parameter and FLOP counts per layer");
  add_common(cx, cx_opts);

  std::vector<std::string> runs;
  std::string report_out = ".";
  std::string report_format = "csv";
  auto* rp = app.add_subcommand("report", "consolidate run summaries into one table");
  rp->add_option("runs", runs, "run directories")->required();
  rp->add_option("--out", report_out, "output directory");
  rp->add_option("--format", report_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage_error: " << one_line(e.what()) << "\n";
    return 64;
  }

  try {
    if (gen->parsed()) {
      csifb::ExperimentConfig cfg = resolve(gen_opts);
      if (count) {
        cfg.dataset.count = *count;
        cfg.validate();
      }
      const csifb::GenOutput out = csifb::run_gen(cfg);
      for (const auto& [path, digest] : out.digests)
        std::cout << path.string() << " " << csifb::read_dataset_header(path).sample_count << " " << digest << "\n";
    } else if (t1->parsed()) {
      print_rows(csifb::run_eval_type1(resolve(t1_opts)));
    } else if (t2->parsed()) {
      print_rows(csifb::run_eval_type2(resolve(t2_opts)));
    } else if (tr->parsed()) {
      print_rows(csifb::run_train(resolve(train_opts), quiet ? nullptr : &std::cerr));
    } else if (ev->parsed()) {
      print_rows(csifb::run_eval_nn(resolve(eval_opts)));
    } else if (cx->parsed()) {
      print_rows(csifb::run_complexity(resolve(cx_opts)));
    } else if (rp->parsed()) {
      std::vector<std::filesystem::path> dirs(runs.begin(), runs.end());
      print_rows(csifb::run_report(dirs, report_out,
                                   report_format == "json" ? csifb::ReportFormat::json : csifb::ReportFormat::csv));
    }
  } catch (const csifb::Error& e) {
    std::cerr << "error: " << e.error_class() << ": " << one_line(e.what()) << "\n";
    return exit_code(e.error_class());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: io_error: " << one_line(e.what()) << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: internal_error: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
