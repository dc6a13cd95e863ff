// SPDX-License-Identifier: Apache-2.0
#include "csifb/harness/experiment.hpp"

#include <json.hpp>

#include <boost/algorithm/string.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "csifb/errors.hpp"
#include "csifb/metrics.hpp"
#include "csifb/nn/checkpoint.hpp"
#include "csifb/type1_codebook.hpp"
#include "csifb/type2_codebook.hpp"

namespace csifb {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string fmt_bits(double b) {
  return b == std::floor(b) ? fmt("%.0f", b) : fmt("%.6f", b);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

DatasetKind expected_kind(const SceneConfig& s) {
  return s.n_rb == 1 ? DatasetKind::eigen_single : DatasetKind::eigen_multi;
}

void check_dataset(const ExperimentConfig& cfg, const DatasetHeader& h, const fs::path& path) {
  const int ns = cfg.scene.n_rb == 1 ? 1 : cfg.scene.n_subbands;
  if (h.kind != expected_kind(cfg.scene) || static_cast<int>(h.nt) != cfg.scene.array.nt() ||
      static_cast<int>(h.ns) != ns)
    throw ContractError("dataset " + path.string() + " (" + to_string(h.kind) + ", nt=" + std::to_string(h.nt) +
                        ", ns=" + std::to_string(h.ns) + ") does not match the configured scene (nt=" +
                        std::to_string(cfg.scene.array.nt()) + ", ns=" + std::to_string(ns) + ")");
}

Dataset load_test_split(const ExperimentConfig& cfg) {
  const fs::path p = dataset_paths(cfg.data_dir(), false).test;
  Dataset ds = read_dataset(p);
  check_dataset(cfg, ds.header, p);
  return ds;
}

template <typename T>
nn::Mat<T> load_split(const ExperimentConfig& cfg, const fs::path& p) {
  DatasetHeader h;
  nn::Mat<T> m = load_real_matrix<T>(p, &h);
  check_dataset(cfg, h, p);
  return m;
}

std::string join_ints(const std::vector<int>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(v[i]);
  }
  return s;
}

std::string join_rows(const std::vector<std::vector<int>>& rows) {
  std::string s;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) s += '|';
    s += join_ints(rows[i], ' ');
  }
  return s;
}

bool same_spec(const nn::ModelSpec& a, const nn::ModelSpec& b) {
  return a.arch == b.arch && a.nt == b.nt && a.ns == b.ns && a.l == b.l && a.quantizer.kind == b.quantizer.kind &&
         a.quantizer.effective_bits() == b.quantizer.effective_bits() && a.leaky_slope == b.leaky_slope &&
         a.width_divisor == b.width_divisor;
}

ReportRow nn_row(const nn::ModelSpec& spec, bool stochastic_eval, double rho, double seconds) {
  const nn::Complexity c = nn::count_params_flops(spec);
  return ReportRow{scheme_name(spec, stochastic_eval), static_cast<double>(spec.n_bits()), rho, c.params, c.flops,
                   seconds};
}

std::string per_sample_csv(const std::vector<double>& rho) {
  std::string s = "index,rho\n";
  for (std::size_t i = 0; i < rho.size(); ++i) s += std::to_string(i) + "," + fmt("%.12f", rho[i]) + "\n";
  return s;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(v.size());
}

}  // namespace

std::string scheme_name(const nn::ModelSpec& spec, bool stochastic_eval) {
  std::string s = nn::to_string(spec.arch) + "/" + spec.quantizer.to_string();
  if (spec.width_divisor != 1) s += "/wd" + std::to_string(spec.width_divisor);
  if (stochastic_eval && spec.quantizer.kind == QuantizerKind::binarize) s += "/stochastic";
  return s;
}

std::string type2_scheme_name(const Type2Config& cfg) {
  return "type2/K" + std::to_string(cfg.k_beams) + "/" + (cfg.phase_mode == PhaseMode::qpsk ? "qpsk" : "8psk") +
         (cfg.subband_amplitude ? "/sbamp" : "");
}

std::string rows_csv(const std::vector<ReportRow>& rows) {
  std::string s = std::string(kReportHeader) + "\n";
  for (const ReportRow& r : rows) {
    if (r.scheme.find_first_of(",\n") != std::string::npos)
      throw ContractError("scheme name may not contain ',' or newline: " + r.scheme);
    s += r.scheme + "," + fmt_bits(r.n_bits) + "," + (std::isnan(r.rho) ? "" : fmt("%.10f", r.rho)) + "," +
         (r.params < 0 ? "" : std::to_string(r.params)) + "," + (r.flops < 0 ? "" : std::to_string(r.flops)) + "," +
         fmt("%.3f", r.wall_seconds) + "\n";
  }
  return s;
}

std::string rows_json(const std::vector<ReportRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ReportRow& r : rows) {
    nlohmann::json j;
    j["scheme"] = r.scheme;
    j["n_bits"] = r.n_bits;
    j["rho"] = std::isnan(r.rho) ? nlohmann::json(nullptr) : nlohmann::json(r.rho);
    j["params"] = r.params < 0 ? nlohmann::json(nullptr) : nlohmann::json(r.params);
    j["flops"] = r.flops < 0 ? nlohmann::json(nullptr) : nlohmann::json(r.flops);
    j["wall_seconds"] = r.wall_seconds;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::vector<ReportRow> parse_rows_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || boost::algorithm::trim_copy(line) != kReportHeader)
    throw IoError("report csv: missing header '" + std::string(kReportHeader) + "'");
  std::vector<ReportRow> rows;
  while (std::getline(is, line)) {
    boost::algorithm::trim(line);
    if (line.empty()) continue;
    std::vector<std::string> f;
    boost::algorithm::split(f, line, boost::is_any_of(","));
    if (f.size() != 6) throw IoError("report csv: expected 6 fields in '" + line + "'");
    try {
      ReportRow r;
      r.scheme = f[0];
      r.n_bits = std::stod(f[1]);
      r.rho = f[2].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[2]);
      r.params = f[3].empty() ? -1 : std::stoll(f[3]);
      r.flops = f[4].empty() ? -1 : std::stoll(f[4]);
      r.wall_seconds = std::stod(f[5]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw IoError("report csv: malformed row '" + line + "'");
    }
  }
  return rows;
}

bool same_result(const ReportRow& a, const ReportRow& b) {
  const bool rho_eq = (std::isnan(a.rho) && std::isnan(b.rho)) || a.rho == b.rho;
  return a.scheme == b.scheme && a.n_bits == b.n_bits && rho_eq && a.params == b.params && a.flops == b.flops;
}

void write_summary(const fs::path& dir, const std::vector<ReportRow>& rows, ReportFormat format) {
  write_text(dir / "summary.csv", rows_csv(rows));
  if (format == ReportFormat::json) write_text(dir / "summary.json", rows_json(rows));
}

std::vector<ReportRow> read_summary(const fs::path& dir) { return parse_rows_csv(read_text(dir / "summary.csv")); }

GenOutput run_gen(const ExperimentConfig& cfg) {
  cfg.scene.validate();
  GenOutput out;
  out.counts = split_counts(cfg.dataset.count, cfg.dataset.split);
  out.files = synth_dataset(cfg.scene, cfg.dataset.count, cfg.dataset.split, cfg.data_dir(), cfg.dataset.save_channels);
  for (const fs::path& p : {out.files.train, out.files.val, out.files.test, out.files.train_channel,
                            out.files.val_channel, out.files.test_channel})
    if (!p.empty()) out.digests.emplace_back(p, file_digest(p));
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir / "config.resolved", render_config(cfg));
  return out;
}

std::vector<ReportRow> run_eval_type1(const ExperimentConfig& cfg) {
  const Dataset ds = load_test_split(cfg);
  const auto t0 = Clock::now();
  const Type1Codebook cb(cfg.scene.array);
  const int per_column = overhead_type1(cfg.scene.array);
  const int ns = static_cast<int>(ds.header.ns);
  SimilarityAccumulator acc;
  std::string csv = "index,pmi,bits,rho\n";
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const CMat& v = ds.samples[i];
    CMat v_hat(v.rows(), v.cols());
    std::vector<int> pmi;
    for (int s = 0; s < ns; ++s) {
      const Type1Pmi p = cb.encode(v.col(s));
      pmi.push_back(p.flat_index);
      v_hat.col(s) = cb.decode(p);
    }
    acc.add(v, v_hat);
    csv += std::to_string(i) + "," + join_ints(pmi, ' ') + "," + std::to_string(per_column * ns) + "," +
           fmt("%.12f", acc.per_sample().back()) + "\n";
  }
  const double secs = seconds_since(t0);
  write_text(cfg.out_dir / "type1_samples.csv", csv);
  const std::vector<ReportRow> rows{
      ReportRow{"type1", static_cast<double>(per_column * ns), acc.report().rho, -1, -1, secs}};
  write_summary(cfg.out_dir, rows, cfg.format);
  return rows;
}

std::vector<ReportRow> run_eval_type2(const ExperimentConfig& cfg) {
  cfg.type2.validate(cfg.scene.array);
  const Dataset ds = load_test_split(cfg);
  const auto t0 = Clock::now();
  const BeamGrid grid = beam_grid(cfg.scene.array);
  SimilarityAccumulator acc;
  double bit_sum = 0.0;
  std::string csv = "index,q1,q2,beam_set,strongest,wb_amp,sb_amp,phase,bits,rho\n";
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const CMat& v = ds.samples[i];
    const Type2Report rep = encode_type2(grid, v, cfg.type2);
    acc.add(v, decode_type2(grid, rep));
    bit_sum += rep.bit_cost;
    csv += std::to_string(i) + "," + std::to_string(rep.q1) + "," + std::to_string(rep.q2) + "," +
           join_ints(rep.beam_set, ' ') + "," + std::to_string(rep.strongest) + "," +
           join_ints(rep.wb_amp_codes, ' ') + "," + join_rows(rep.sb_amp_codes) + "," + join_rows(rep.phase_codes) +
           "," + std::to_string(rep.bit_cost) + "," + fmt("%.12f", acc.per_sample().back()) + "\n";
  }
  const double secs = seconds_since(t0);
  write_text(cfg.out_dir / "type2_samples.csv", csv);
  const double mean_bits = ds.samples.empty() ? 0.0 : bit_sum / static_cast<double>(ds.samples.size());
  const std::vector<ReportRow> rows{ReportRow{type2_scheme_name(cfg.type2), mean_bits, acc.report().rho, -1, -1, secs}};
  write_summary(cfg.out_dir, rows, cfg.format);
  return rows;
}

std::vector<ReportRow> run_train(const ExperimentConfig& cfg, std::ostream* log) {
  if (cfg.mode != FeedbackMode::nn) throw ConfigError("train requires [experiment] mode = nn");
  cfg.train.validate();
  const auto variants = model_variants(cfg);
  const DatasetFiles files = dataset_paths(cfg.data_dir(), false);
  nn::Mat<float> train_data = load_split<float>(cfg, files.train);
  if (cfg.max_train_samples > 0 && static_cast<std::uint64_t>(train_data.cols()) > cfg.max_train_samples)
    train_data = train_data.leftCols(static_cast<Eigen::Index>(cfg.max_train_samples)).eval();
  const nn::Mat<float> val_data = load_split<float>(cfg, files.val);
  const nn::Mat<float> test_data = load_split<float>(cfg, files.test);
  const std::string train_digest = file_digest(files.train);
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir / "config.resolved", render_config(cfg));

  std::vector<ReportRow> rows;
  for (const ModelVariant& v : variants) {
    const auto t0 = Clock::now();
    nn::Model<float> model(v.spec);
    model.set_stochastic_eval(cfg.model.stochastic_eval);
    nn::TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.train.seed, v.tag);
    if (log) *log << v.tag << ": " << train_data.cols() << " training samples, " << tc.epochs << " epochs\n";
    const nn::TrainResult res = nn::train(model, train_data, val_data, tc, [&](const nn::EpochRecord& e) {
      if (log && ((e.epoch + 1) % 10 == 0 || e.epoch + 1 == tc.epochs))
        *log << "  epoch " << e.epoch << " train " << e.train_loss << " val " << e.val_loss << " lr " << e.lr
             << "\n";
    });
    const double secs = seconds_since(t0);
    write_text(cfg.out_dir / (v.tag + "_history.csv"), nn::history_csv(res.history));
    nn::save_checkpoint(cfg.out_dir / (v.tag + ".ckpt"), model,
                        {{"experiment_seed", std::to_string(cfg.seed)},
                         {"train_seed", std::to_string(tc.seed)},
                         {"train_digest", train_digest},
                         {"train_samples", std::to_string(train_data.cols())},
                         {"best_epoch", std::to_string(res.best_epoch)}});
    model.reseed_quantizer(derive_seed(cfg.seed, "eval/" + v.tag));
    const double rho = mean(nn::evaluate_similarity(model, test_data));
    rows.push_back(nn_row(v.spec, cfg.model.stochastic_eval, rho, secs));
    if (log) *log << v.tag << ": test rho " << rho << "\n";
  }
  write_text(cfg.out_dir / "train_summary.csv", rows_csv(rows));
  return rows;
}

std::vector<ReportRow> run_eval_nn(const ExperimentConfig& cfg) {
  if (cfg.mode != FeedbackMode::nn) throw ConfigError("eval-nn requires [experiment] mode = nn");
  const auto variants = model_variants(cfg);
  std::vector<std::string> missing;
  for (const ModelVariant& v : variants)
    if (!fs::exists(cfg.out_dir / (v.tag + ".ckpt"))) missing.push_back(v.tag + ".ckpt");
  if (!missing.empty())
    throw IoError("missing checkpoints in " + cfg.out_dir.string() + ": " + boost::algorithm::join(missing, ", "));
  const nn::Mat<float> test_data = load_split<float>(cfg, dataset_paths(cfg.data_dir(), false).test);

  std::vector<ReportRow> rows;
  for (const ModelVariant& v : variants) {
    const auto t0 = Clock::now();
    auto model = nn::load_checkpoint<float>(cfg.out_dir / (v.tag + ".ckpt"));
    if (!same_spec(model->spec(), v.spec))
      throw ContractError("checkpoint " + v.tag + ".ckpt does not match the configured model");
    model->set_stochastic_eval(cfg.model.stochastic_eval);
    model->reseed_quantizer(derive_seed(cfg.seed, "eval/" + v.tag));
    const std::vector<double> rho = nn::evaluate_similarity(*model, test_data);
    const double secs = seconds_since(t0);
    write_text(cfg.out_dir / (v.tag + "_samples.csv"), per_sample_csv(rho));
    rows.push_back(nn_row(v.spec, cfg.model.stochastic_eval, mean(rho), secs));
  }
  write_summary(cfg.out_dir, rows, cfg.format);
  return rows;
}

std::vector<ReportRow> run_complexity(const ExperimentConfig& cfg) {
  if (cfg.mode != FeedbackMode::nn) throw ConfigError("complexity requires [experiment] mode = nn");
  std::vector<ReportRow> rows;
  for (const ModelVariant& v : model_variants(cfg)) {
    const auto t0 = Clock::now();
    const nn::Complexity c = nn::count_params_flops(v.spec);
    std::string csv = "layer,part,params,flops\n";
    for (const nn::LayerCost& l : c.layers)
      csv += l.name + "," + (l.encoder ? "encoder" : "decoder") + "," + std::to_string(l.params) + "," +
             std::to_string(l.flops) + "\n";
    csv += "total,all," + std::to_string(c.params) + "," + std::to_string(c.flops) + "\n";
    write_text(cfg.out_dir / ("complexity_" + v.tag + ".csv"), csv);
    rows.push_back(ReportRow{scheme_name(v.spec, cfg.model.stochastic_eval), static_cast<double>(v.spec.n_bits()),
                             std::numeric_limits<double>::quiet_NaN(), c.params, c.flops, seconds_since(t0)});
  }
  write_summary(cfg.out_dir, rows, cfg.format);
  return rows;
}

std::vector<ReportRow> run_report(const std::vector<fs::path>& runs, const fs::path& out, ReportFormat format) {
  if (runs.empty()) throw ConfigError("report needs at least one run directory");
  std::vector<std::string> missing;
  for (const fs::path& r : runs)
    if (!fs::exists(r / "summary.csv")) missing.push_back(r.string());
  if (!missing.empty()) throw IoError("missing runs: " + boost::algorithm::join(missing, ", "));
  std::vector<ReportRow> rows;
  for (const fs::path& r : runs) {
    auto part = read_summary(r);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  write_text(out / "report.csv", rows_csv(rows));
  if (format == ReportFormat::json) write_text(out / "report.json", rows_json(rows));
  return rows;
}

}  // namespace csifb
