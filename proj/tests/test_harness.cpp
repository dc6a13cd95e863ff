// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "csifb/errors.hpp"
#include "csifb/harness/config.hpp"
#include "csifb/harness/dataset.hpp"
#include "csifb/harness/experiment.hpp"
#include "csifb/nn/checkpoint.hpp"
#include "csifb/type1_codebook.hpp"
#include "csifb/type2_codebook.hpp"
#include "test_util.hpp"

using namespace csifb;
namespace fs = std::filesystem;

namespace {

const char* kSingleRb = R"(
[experiment]
name = tiny
seed = 5
mode = nn

[scene]
n1 = 2
n2 = 2
nr = 2
n_rb = 1
n_subbands = 1

[dataset]
count = 200

[model]
architecture = imcsinet_s
quantizer = binarize
n_bits = 8

[train]
batch_size = 32
epochs = 3
)";

const char* kMultiRb = R"(
[experiment]
name = tiny_multi
seed = 9
mode = type2

[scene]
n1 = 2
n2 = 2
nr = 2
n_rb = 8
n_subbands = 4

[dataset]
count = 60

[type2]
k_beams = 2
phase = qpsk

[model]
architecture = imcsinet_m
quantizer = uniform:2
n_bits = 16
width_divisor = 4

[train]
batch_size = 16
epochs = 2
)";

ExperimentConfig config_in(const char* text, const std::string& dir) {
  ExperimentConfig c = parse_config(text);
  c.out_dir = test::scratch_dir(dir);
  return c;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  os << s;
}

}  // namespace

TEST(Dataset, WriteReadWriteIsByteIdentical) {
  const fs::path dir = test::scratch_dir("ds_roundtrip");
  const ExperimentConfig c = config_in(kMultiRb, "ds_roundtrip_run");
  const DatasetFiles f = synth_dataset(c.scene, 30, SplitFractions{}, dir, true);
  for (const fs::path& p : {f.train, f.test, f.train_channel}) {
    const Dataset ds = read_dataset(p);
    write_dataset(dir / "copy.csif", ds);
    EXPECT_EQ(test::file_bytes(p), test::file_bytes(dir / "copy.csif")) << p;
  }
  const DatasetHeader h = read_dataset_header(f.train);
  EXPECT_EQ(h.kind, DatasetKind::eigen_multi);
  EXPECT_EQ(h.nt, 8u);
  EXPECT_EQ(h.ns, 4u);
  EXPECT_EQ(h.sample_count, 24u);
}

TEST(Dataset, PayloadLengthMismatchIsIoError) {
  const fs::path dir = test::scratch_dir("ds_bad");
  const ExperimentConfig c = config_in(kSingleRb, "ds_bad_run");
  const DatasetFiles f = synth_dataset(c.scene, 10, SplitFractions{}, dir, false);
  const std::string bytes = test::file_bytes(f.train);
  write_text(dir / "short.csif", bytes.substr(0, bytes.size() - 4));
  EXPECT_THROW(read_dataset(dir / "short.csif"), IoError);
  write_text(dir / "long.csif", bytes + "xxxx");
  EXPECT_THROW(read_dataset(dir / "long.csif"), IoError);
  write_text(dir / "magic.csif", "CSIX" + bytes.substr(4));
  EXPECT_THROW(read_dataset(dir / "magic.csif"), IoError);
  EXPECT_THROW(read_dataset(dir / "missing.csif"), IoError);
}

TEST(Dataset, RealMatrixLayout) {
  const fs::path dir = test::scratch_dir("ds_real");
  const ExperimentConfig c = config_in(kMultiRb, "ds_real_run");
  const DatasetFiles f = synth_dataset(c.scene, 10, SplitFractions{}, dir, false);
  const Dataset ds = read_dataset(f.train);
  const nn::Mat<double> x = load_real_matrix<double>(f.train);
  ASSERT_EQ(x.rows(), 2 * 8 * 4);
  ASSERT_EQ(x.cols(), 8);
  for (int j = 0; j < 8; ++j)
    for (int s = 0; s < 4; ++s)
      for (int i = 0; i < 8; ++i) {
        EXPECT_EQ(x(s * 8 + i, j), static_cast<float>(ds.samples[j](i, s).real()));
        EXPECT_EQ(x(32 + s * 8 + i, j), static_cast<float>(ds.samples[j](i, s).imag()));
      }
}

TEST(Config, ParseRenderRoundTrip) {
  const ExperimentConfig a = parse_config(kMultiRb);
  EXPECT_EQ(a.mode, FeedbackMode::type2);
  EXPECT_EQ(a.scene.array.nt(), 8);
  EXPECT_EQ(a.type2.k_beams, 2);
  const std::string text = render_config(a);
  const ExperimentConfig b = parse_config(text);
  EXPECT_EQ(render_config(b), text);
  EXPECT_EQ(b.seed, a.seed);
  EXPECT_EQ(b.train.seed, a.train.seed);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("[bogus]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[scene]\nn9 = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[scene]\nn1 = two\n"), ConfigError);
  EXPECT_THROW(parse_config("[type2]\nphase = 16psk\n"), ConfigError);
  EXPECT_THROW(parse_config("[model]\narchitecture = cnn\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/x.cfg"), IoError);
}

TEST(Config, SeedDerivation) {
  ExperimentConfig c = parse_config(kSingleRb);
  const auto t = c.train.seed;
  c.set_seed(6);
  EXPECT_EQ(c.seed, 6u);
  EXPECT_NE(c.train.seed, t);
  EXPECT_EQ(c.train.seed, derive_seed(6, "train"));
  EXPECT_NE(derive_seed(6, "a"), derive_seed(6, "b"));
  EXPECT_NE(derive_seed(6, "a"), derive_seed(7, "a"));
}

TEST(Config, ModelVariantRounding) {
  ExperimentConfig c = parse_config(kMultiRb);
  c.model.arch = nn::Architecture::bi_imcsinet;
  c.model.quantizers = {QuantizerSpec::parse("uniform:2"), QuantizerSpec::parse("uniform:6")};
  c.model.n_bits = {32};
  EXPECT_THROW(model_variants(c), ConfigError);
  c.model.rounding = BitsRounding::floor;
  const std::vector<ModelVariant> v = model_variants(c);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].spec.l, 16);
  EXPECT_EQ(v[0].tag, "bi_imcsinet-uniform-2-L16");
  EXPECT_EQ(v[1].spec.l, 4);
  EXPECT_EQ(v[1].spec.n_bits(), 24);
  EXPECT_NE(v[0].spec.init_seed, v[1].spec.init_seed);

  c.model.n_bits = {8};
  EXPECT_THROW(model_variants(c), ConfigError);
  c.model.arch = nn::Architecture::imcsinet_s;
  EXPECT_THROW(model_variants(c), ConfigError);
}

TEST(Report, CsvRoundTripAndFormatting) {
  std::vector<ReportRow> rows(3);
  rows[0] = {"type1", 8, 0.25, -1, -1, 1.5};
  rows[1] = {"type2/K4/qpsk", 245.3, 0.9, -1, -1, 0.0};
  rows[2] = {"imcsinet_s/binarize", 8, std::nan(""), 41592, 77288, 0.1234};
  const std::string csv = rows_csv(rows);
  EXPECT_EQ(csv,
            "scheme,n_bits,rho,params,flops,wall_seconds\n"
            "type1,8,0.2500000000,,,1.500\n"
            "type2/K4/qpsk,245.300000,0.9000000000,,,0.000\n"
            "imcsinet_s/binarize,8,,41592,77288,0.123\n");
  const std::vector<ReportRow> back = parse_rows_csv(csv);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(same_result(rows[i], back[i])) << i;
  EXPECT_EQ(rows_csv(back), csv);
  EXPECT_THROW(parse_rows_csv("a,b\n"), IoError);
  EXPECT_THROW(parse_rows_csv(std::string(kReportHeader) + "\nx,1,2\n"), IoError);
  rows[0].scheme = "a,b";
  EXPECT_THROW(rows_csv(rows), ContractError);
}

TEST(Report, SameResultIgnoresWallTime) {
  ReportRow a{"x", 8, 0.5, 10, 20, 1.0}, b = a;
  b.wall_seconds = 99;
  EXPECT_TRUE(same_result(a, b));
  b.rho = 0.5000001;
  EXPECT_FALSE(same_result(a, b));
}

TEST(Runners, TypeOneOnExactCodewords) {
  ExperimentConfig c = config_in(kSingleRb, "t1_exact");
  const std::vector<CVec> words = enumerate_type1(c.scene.array);
  DatasetHeader h;
  h.kind = DatasetKind::eigen_single;
  h.nt = 8;
  h.nr = 2;
  h.ns = 1;
  h.sample_count = words.size();
  Dataset ds{h, {}};
  for (const CVec& w : words) ds.samples.push_back(CMat(w));
  fs::create_directories(c.data_dir());
  write_dataset(dataset_paths(c.data_dir(), false).test, ds);
  const std::vector<ReportRow> rows = run_eval_type1(c);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].scheme, "type1");
  EXPECT_EQ(rows[0].n_bits, 8);
  EXPECT_NEAR(rows[0].rho, 1.0, 1e-6);

  std::ifstream is(c.out_dir / "type1_samples.csv");
  std::string line;
  int n = -1;
  while (std::getline(is, line)) ++n;
  EXPECT_EQ(n, static_cast<int>(words.size()));
}

TEST(Runners, TypeTwoOnSingleBeamStacks) {
  ExperimentConfig c = config_in(kMultiRb, "t2_exact");
  const BeamGrid g(c.scene.array);
  DatasetHeader h;
  h.kind = DatasetKind::eigen_multi;
  h.nt = 8;
  h.nr = 2;
  h.ns = 4;
  Dataset ds{h, {}};
  for (int pos : {0, 5, 17, 40, 63}) {
    CVec col(8);
    col << g[pos], g[pos];
    col /= std::sqrt(8.0);
    ds.samples.push_back(col.replicate(1, 4));
  }
  ds.header.sample_count = ds.samples.size();
  fs::create_directories(c.data_dir());
  write_dataset(dataset_paths(c.data_dir(), false).test, ds);
  const std::vector<ReportRow> rows = run_eval_type2(c);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].scheme, "type2/K2/qpsk");
  EXPECT_NEAR(rows[0].rho, 1.0, 1e-6);
}

TEST(Runners, DatasetSceneMismatchIsContractError) {
  ExperimentConfig single = config_in(kSingleRb, "mismatch");
  run_gen(single);
  ExperimentConfig multi = parse_config(kMultiRb);
  multi.out_dir = single.out_dir;
  EXPECT_THROW(run_eval_type2(multi), ContractError);
  EXPECT_THROW(run_eval_type1(config_in(kSingleRb, "nodata")), IoError);
}

TEST(Runners, GenEvalTrainPipeline) {
  ExperimentConfig c = config_in(kSingleRb, "pipeline");
  c.model.n_bits = {2, 3, 4, 5, 6, 7, 8};
  const GenOutput g = run_gen(c);
  EXPECT_EQ(g.counts.train, 160u);
  EXPECT_EQ(g.counts.val, 20u);
  EXPECT_EQ(g.counts.test, 20u);
  EXPECT_EQ(g.digests.size(), 3u);

  const std::vector<ReportRow> t1 = run_eval_type1(c);
  ASSERT_EQ(t1.size(), 1u);
  EXPECT_GT(t1[0].rho, 0.3);

  std::ostringstream log;
  const std::vector<ReportRow> trained = run_train(c, &log);
  ASSERT_EQ(trained.size(), 7u);
  for (int i = 0; i < 7; ++i) {
    EXPECT_EQ(trained[i].n_bits, i + 2);
    EXPECT_EQ(trained[i].scheme, "imcsinet_s/binarize");
    EXPECT_TRUE(fs::exists(c.out_dir / ("imcsinet_s-binarize-L" + std::to_string(i + 2) + ".ckpt")));
  }
  const std::vector<ReportRow> evals = run_eval_nn(c);
  ASSERT_EQ(evals.size(), 7u);
  for (int i = 0; i < 7; ++i) {
    EXPECT_TRUE(same_result(evals[i], trained[i])) << i;
  }
  const std::vector<ReportRow> summary = read_summary(c.out_dir);
  ASSERT_EQ(summary.size(), 7u);

  std::ifstream is(c.out_dir / "imcsinet_s-binarize-L8_samples.csv");
  std::string line;
  int n = -1;
  while (std::getline(is, line)) ++n;
  EXPECT_EQ(n, 20);
}

TEST(Runners, TrainingBeatsUntrainedModel) {
  ExperimentConfig c = config_in(kSingleRb, "improves");
  c.dataset.count = 1000;
  c.train.epochs = 20;
  run_gen(c);
  ExperimentConfig untrained = c;
  untrained.train.epochs = 0;
  const double before = run_train(untrained).front().rho;
  const double after = run_train(c).front().rho;
  EXPECT_GT(after, before + 0.05);
}

TEST(Runners, EvalNnErrors) {
  ExperimentConfig c = config_in(kSingleRb, "evalnn_err");
  run_gen(c);
  EXPECT_THROW(run_eval_nn(c), IoError);
  c.train.epochs = 1;
  run_train(c);
  c.model.leaky_slope = 0.1;
  EXPECT_THROW(run_eval_nn(c), ContractError);
}

TEST(Runners, ComplexityMatchesCounts) {
  ExperimentConfig c = config_in(kMultiRb, "complexity");
  c.mode = FeedbackMode::nn;
  c.model.n_bits = {16, 32};
  const std::vector<ReportRow> rows = run_complexity(c);
  const std::vector<ModelVariant> v = model_variants(c);
  ASSERT_EQ(rows.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const nn::Complexity k = nn::count_params_flops(v[i].spec);
    EXPECT_EQ(rows[i].params, k.params);
    EXPECT_EQ(rows[i].flops, k.flops);
    EXPECT_TRUE(std::isnan(rows[i].rho));
    EXPECT_TRUE(fs::exists(c.out_dir / ("complexity_" + v[i].tag + ".csv")));
  }
}

TEST(Runners, ReportConcatenatesRuns) {
  ExperimentConfig a = config_in(kSingleRb, "rep_a");
  run_gen(a);
  run_eval_type1(a);
  ExperimentConfig b = config_in(kMultiRb, "rep_b");
  b.mode = FeedbackMode::nn;
  run_complexity(b);
  const fs::path out = test::scratch_dir("rep_out");
  const std::vector<ReportRow> rows = run_report({a.out_dir, b.out_dir}, out, ReportFormat::json);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].scheme, "type1");
  EXPECT_EQ(rows[0].n_bits, 8);
  EXPECT_EQ(parse_rows_csv(test::file_bytes(out / "report.csv")).size(), 2u);
  EXPECT_TRUE(fs::exists(out / "report.json"));
  try {
    run_report({a.out_dir, "/nonexistent/run1", "/nonexistent/run2"}, out, ReportFormat::csv);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("run1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("run2"), std::string::npos);
  }
}

TEST(Runners, ReproducibleAcrossRuns) {
  ExperimentConfig a = config_in(kSingleRb, "repro_a");
  ExperimentConfig b = config_in(kSingleRb, "repro_b");
  const GenOutput ga = run_gen(a), gb = run_gen(b);
  for (std::size_t i = 0; i < ga.digests.size(); ++i) EXPECT_EQ(ga.digests[i].second, gb.digests[i].second);
  const auto ra = run_train(a), rb = run_train(b);
  EXPECT_TRUE(same_result(ra[0], rb[0]));
  const std::string tag = "imcsinet_s-binarize-L8";
  EXPECT_EQ(test::file_bytes(a.out_dir / (tag + "_history.csv")), test::file_bytes(b.out_dir / (tag + "_history.csv")));
  EXPECT_EQ(test::file_bytes(a.out_dir / (tag + ".ckpt")), test::file_bytes(b.out_dir / (tag + ".ckpt")));

  ExperimentConfig other = config_in(kSingleRb, "repro_c");
  other.set_seed(6);
  EXPECT_NE(run_gen(other).digests[0].second, ga.digests[0].second);
}

namespace {

struct CliResult {
  int code;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(CSIFB_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 512> buf;
  while (std::fgets(buf.data(), buf.size(), p)) out += buf.data();
  const int status = pclose(p);
  return {WEXITSTATUS(status), out};
}

}  // namespace

TEST(Cli, GenAndEvalSmoke) {
  const fs::path dir = test::scratch_dir("cli");
  write_text(dir / "c.cfg", kSingleRb);
  const std::string base = "--config " + (dir / "c.cfg").string() + " --out " + (dir / "run").string();
  CliResult r = run_cli("gen " + base + " --count 50");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("train_eigen.csif 40 "), std::string::npos) << r.out;
  r = run_cli("eval-type1 " + base);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.rfind(kReportHeader, 0), 0u) << r.out;
  EXPECT_NE(r.out.find("\ntype1,8,"), std::string::npos);
  r = run_cli("report " + (dir / "run").string() + " --out " + (dir / "rep").string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir / "rep" / "report.csv"));
}

TEST(Cli, ErrorsAreSingleLineWithClassExitCodes) {
  const fs::path dir = test::scratch_dir("cli_err");
  write_text(dir / "bad.cfg", "[scene]\nbogus = 1\n");
  write_text(dir / "ok.cfg", kSingleRb);
  auto check = [](const CliResult& r, int code, const std::string& cls) {
    EXPECT_EQ(r.code, code) << r.out;
    EXPECT_EQ(r.out.rfind("error: " + cls + ": ", 0), 0u) << r.out;
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1) << r.out;
  };
  check(run_cli("gen --config " + (dir / "bad.cfg").string()), 2, "config_error");
  check(run_cli("gen --config " + (dir / "missing.cfg").string()), 3, "io_error");
  check(run_cli("eval-type1 --config " + (dir / "ok.cfg").string() + " --out " + (dir / "empty").string()), 3,
        "io_error");
  check(run_cli("report " + (dir / "nope").string()), 3, "io_error");
  EXPECT_NE(run_cli("frobnicate").code, 0);
}

TEST(Report, SchemeNames) {
  nn::ModelSpec s;
  EXPECT_EQ(scheme_name(s), "imcsinet_s/binarize");
  EXPECT_EQ(scheme_name(s, true), "imcsinet_s/binarize/stochastic");
  s.arch = nn::Architecture::imcsinet_m;
  s.ns = 4;
  s.quantizer = QuantizerSpec::parse("uniform:2");
  s.width_divisor = 8;
  EXPECT_EQ(scheme_name(s, true), "imcsinet_m/uniform:2/wd8");
  EXPECT_EQ(type2_scheme_name({4, PhaseMode::psk8, true}), "type2/K4/8psk/sbamp");
}
