// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: INI-style "key = value" lines grouped under
// [section] headers; '#' and ';' start comments. Unknown sections or keys are
// rejected so typos surface as config errors.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "csifb/channel_synth.hpp"
#include "csifb/harness/dataset.hpp"
#include "csifb/nn/model_spec.hpp"
#include "csifb/nn/trainer.hpp"
#include "csifb/quantizers.hpp"
#include "csifb/type2_codebook.hpp"

namespace csifb {

enum class FeedbackMode { type1, type2, nn };
enum class ReportFormat { csv, json };

std::string to_string(FeedbackMode m);
std::string to_string(ReportFormat f);

struct DatasetConfig {
  std::uint64_t count = 20000;
  SplitFractions split{};
  bool save_channels = false;
  /// Empty means <out>/data.
  std::filesystem::path dir;
};

/// How N_bits maps to a codeword length when N_bits / B is not a valid L.
enum class BitsRounding { exact, floor };

struct ModelSweep {
  nn::Architecture arch = nn::Architecture::imcsinet_s;
  /// Each quantizer is paired with each requested size.
  std::vector<QuantizerSpec> quantizers{QuantizerSpec{}};
  /// Requested feedback sizes; mutually exclusive with codeword_lengths.
  std::vector<long long> n_bits;
  std::vector<int> codeword_lengths;
  BitsRounding rounding = BitsRounding::exact;
  double leaky_slope = 0.3;
  int width_divisor = 1;
  /// Stochastic binarization at evaluation time (default deterministic sign).
  bool stochastic_eval = false;
};

struct ExperimentConfig {
  std::string name = "experiment";
  /// Master seed; scene, shuffle, initialization and training seeds derive
  /// from it.
  std::uint64_t seed = 1;
  SceneConfig scene{};
  DatasetConfig dataset{};
  FeedbackMode mode = FeedbackMode::type1;
  Type2Config type2{};
  ModelSweep model{};
  nn::TrainConfig train{};
  /// Caps the training split (0 = use all).
  std::uint64_t max_train_samples = 0;
  std::filesystem::path out_dir = "out";
  ReportFormat format = ReportFormat::csv;

  std::filesystem::path data_dir() const;
  /// Installs seed and re-derives every dependent seed.
  void set_seed(std::uint64_t s);
  void validate() const;
};

/// Concrete model for one sweep entry.
struct ModelVariant {
  nn::ModelSpec spec;
  std::string tag;  // filesystem-safe, e.g. imcsinet_s-uniform-2-L8
};

std::vector<ModelVariant> model_variants(const ExperimentConfig& cfg);

/// Seed for a named purpose under the master seed.
std::uint64_t derive_seed(std::uint64_t master, const std::string& purpose);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical text of the resolved configuration (parse_config round-trips it).
std::string render_config(const ExperimentConfig& cfg);

}  // namespace csifb
