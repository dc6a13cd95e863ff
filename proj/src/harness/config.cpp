// SPDX-License-Identifier: Apache-2.0
#include "csifb/harness/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "csifb/errors.hpp"
#include "csifb/rng.hpp"

namespace csifb {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> k = {
      {"experiment", {"name", "seed", "mode", "out", "format"}},
      {"scene",
       {"name", "n1", "n2", "o1", "o2", "nr", "n_rb", "n_subbands", "n_paths", "delay_spread", "carrier_hz",
        "angle_spread", "sector_half_width", "zenith_lo", "zenith_hi", "xpr"}},
      {"dataset", {"count", "train", "val", "test", "save_channels", "dir"}},
      {"type2", {"k_beams", "phase", "subband_amplitude"}},
      {"model",
       {"architecture", "quantizer", "n_bits", "l", "rounding", "leaky_slope", "width_divisor",
        "stochastic_eval"}},
      {"train", {"batch_size", "epochs", "lr", "patience", "lr_factor", "beta1", "beta2", "eps", "max_samples"}},
  };
  return k;
}

template <typename T>
T convert(const std::string& section, const std::string& key, std::string text) {
  boost::algorithm::trim(text);
  try {
    if constexpr (std::is_same_v<T, bool>) {
      boost::algorithm::to_lower(text);
      if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
      if (text == "false" || text == "0" || text == "no" || text == "off") return false;
      throw boost::bad_lexical_cast();
    } else if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else {
      return boost::lexical_cast<T>(text);
    }
  } catch (const boost::bad_lexical_cast&) {
    throw ConfigError("[" + section + "] " + key + ": cannot parse '" + text + "'");
  }
}

template <typename T>
std::vector<T> convert_list(const std::string& section, const std::string& key, const std::string& text) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::is_any_of(","));
  std::vector<T> out;
  for (auto& p : parts) {
    boost::algorithm::trim(p);
    if (p.empty()) continue;
    out.push_back(convert<T>(section, key, p));
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <typename T>
  void read(const std::string& section, const std::string& key, T& dst) const {
    if (auto v = raw(section, key)) dst = convert<T>(section, key, *v);
  }
  template <typename T>
  void read_list(const std::string& section, const std::string& key, std::vector<T>& dst) const {
    if (auto v = raw(section, key)) dst = convert_list<T>(section, key, *v);
  }
  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    auto s = tree_.get_child_optional(section);
    if (!s) return std::nullopt;
    auto v = s->get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return v->data();
  }

 private:
  const pt::ptree& tree_;
};

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    if constexpr (std::is_same_v<T, QuantizerSpec>)
      os << v[i].to_string();
    else
      os << v[i];
  }
  return os.str();
}

}  // namespace

std::string to_string(FeedbackMode m) {
  switch (m) {
    case FeedbackMode::type1: return "type1";
    case FeedbackMode::type2: return "type2";
    case FeedbackMode::nn: return "nn";
  }
  return "?";
}

std::string to_string(ReportFormat f) { return f == ReportFormat::csv ? "csv" : "json"; }

std::filesystem::path ExperimentConfig::data_dir() const {
  return dataset.dir.empty() ? out_dir / "data" : dataset.dir;
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& purpose) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : purpose) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return mix64(master ^ h);
}

void ExperimentConfig::set_seed(std::uint64_t s) {
  seed = s;
  scene.seed = s;
  train.seed = derive_seed(s, "train");
}

void ExperimentConfig::validate() const {
  scene.validate();
  split_counts(dataset.count, dataset.split);
  if (scene.n_rb % scene.n_subbands != 0)
    throw ConfigError("[scene] n_subbands must divide n_rb");
  if (mode == FeedbackMode::type2) type2.validate(scene.array);
  if (mode == FeedbackMode::nn) {
    train.validate();
    model_variants(*this);
  }
}

std::vector<ModelVariant> model_variants(const ExperimentConfig& cfg) {
  const ModelSweep& m = cfg.model;
  if (m.n_bits.empty() == m.codeword_lengths.empty())
    throw ConfigError("[model] set exactly one of n_bits or l");
  if (m.quantizers.empty()) throw ConfigError("[model] quantizer list is empty");
  const int ns = m.arch == nn::Architecture::imcsinet_s ? 1 : cfg.scene.n_subbands;
  if (m.arch == nn::Architecture::imcsinet_s && cfg.scene.n_rb != 1)
    throw ConfigError("[model] imcsinet_s needs a single-RB scene (n_rb = 1)");
  if (m.arch != nn::Architecture::imcsinet_s && cfg.scene.n_rb == 1)
    throw ConfigError("[model] multi-RB architectures need n_rb > 1");
  const int step = m.arch == nn::Architecture::bi_imcsinet ? ns : 1;

  std::vector<ModelVariant> out;
  for (const QuantizerSpec& q : m.quantizers) {
    q.validate();
    const long long eff = q.effective_bits();
    std::vector<int> lengths = m.codeword_lengths;
    for (long long nb : m.n_bits) {
      if (nb < 1) throw ConfigError("[model] n_bits must be >= 1");
      long long l = nb / eff;
      if (m.rounding == BitsRounding::exact) {
        if (nb % eff != 0 || l % step != 0)
          throw ConfigError("[model] n_bits = " + std::to_string(nb) + " is not realizable with " + q.to_string() +
                            (step > 1 ? " and L divisible by " + std::to_string(step) : std::string()) +
                            "; set rounding = floor or use l");
      } else {
        l -= l % step;
      }
      if (l < 1) throw ConfigError("[model] n_bits = " + std::to_string(nb) + " too small for " + q.to_string());
      lengths.push_back(static_cast<int>(l));
    }
    for (int l : lengths) {
      ModelVariant v;
      v.spec.arch = m.arch;
      v.spec.nt = cfg.scene.array.nt();
      v.spec.ns = ns;
      v.spec.l = l;
      v.spec.quantizer = q;
      v.spec.leaky_slope = m.leaky_slope;
      v.spec.width_divisor = m.width_divisor;
      std::string qs = q.to_string();
      std::replace(qs.begin(), qs.end(), ':', '-');
      v.tag = nn::to_string(m.arch) + "-" + qs + "-L" + std::to_string(l);
      v.spec.init_seed = derive_seed(cfg.seed, "init/" + v.tag);
      try {
        v.spec.validate();
      } catch (const Error& e) {
        throw ConfigError("[model] " + v.tag + ": " + e.what());
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (body.empty()) throw ConfigError("key outside a section: " + section);
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& kv : body)
      if (!it->second.count(kv.first)) throw ConfigError("unknown key [" + section + "] " + kv.first);
  }

  Reader r(tree);
  ExperimentConfig c;
  std::uint64_t seed = 1;
  r.read("experiment", "name", c.name);
  r.read("experiment", "seed", seed);
  if (auto v = r.raw("experiment", "mode")) {
    const auto s = convert<std::string>("experiment", "mode", *v);
    if (s == "type1") c.mode = FeedbackMode::type1;
    else if (s == "type2") c.mode = FeedbackMode::type2;
    else if (s == "nn") c.mode = FeedbackMode::nn;
    else throw ConfigError("[experiment] mode must be type1, type2 or nn");
  }
  std::string out = c.out_dir.string();
  r.read("experiment", "out", out);
  c.out_dir = out;
  if (auto v = r.raw("experiment", "format")) {
    const auto s = convert<std::string>("experiment", "format", *v);
    if (s == "csv") c.format = ReportFormat::csv;
    else if (s == "json") c.format = ReportFormat::json;
    else throw ConfigError("[experiment] format must be csv or json");
  }

  SceneConfig& sc = c.scene;
  r.read("scene", "name", sc.name);
  r.read("scene", "n1", sc.array.n1);
  r.read("scene", "n2", sc.array.n2);
  r.read("scene", "o1", sc.array.o1);
  r.read("scene", "o2", sc.array.o2);
  r.read("scene", "nr", sc.array.nr);
  r.read("scene", "n_rb", sc.n_rb);
  r.read("scene", "n_subbands", sc.n_subbands);
  r.read("scene", "n_paths", sc.n_paths);
  r.read("scene", "delay_spread", sc.delay_spread);
  r.read("scene", "carrier_hz", sc.carrier_hz);
  r.read("scene", "angle_spread", sc.angle_spread);
  r.read("scene", "sector_half_width", sc.sector_half_width);
  r.read("scene", "zenith_lo", sc.zenith_lo);
  r.read("scene", "zenith_hi", sc.zenith_hi);
  r.read("scene", "xpr", sc.xpr);

  r.read("dataset", "count", c.dataset.count);
  r.read("dataset", "train", c.dataset.split.train);
  r.read("dataset", "val", c.dataset.split.val);
  r.read("dataset", "test", c.dataset.split.test);
  r.read("dataset", "save_channels", c.dataset.save_channels);
  std::string dir;
  r.read("dataset", "dir", dir);
  c.dataset.dir = dir;

  r.read("type2", "k_beams", c.type2.k_beams);
  if (auto v = r.raw("type2", "phase")) {
    const auto s = convert<std::string>("type2", "phase", *v);
    if (s == "qpsk") c.type2.phase_mode = PhaseMode::qpsk;
    else if (s == "8psk") c.type2.phase_mode = PhaseMode::psk8;
    else throw ConfigError("[type2] phase must be qpsk or 8psk");
  }
  r.read("type2", "subband_amplitude", c.type2.subband_amplitude);

  if (auto v = r.raw("model", "architecture")) {
    try {
      c.model.arch = nn::parse_architecture(convert<std::string>("model", "architecture", *v));
    } catch (const Error& e) {
      throw ConfigError(std::string("[model] architecture: ") + e.what());
    }
  }
  if (auto v = r.raw("model", "quantizer")) {
    c.model.quantizers.clear();
    for (const auto& s : convert_list<std::string>("model", "quantizer", *v)) {
      try {
        c.model.quantizers.push_back(QuantizerSpec::parse(s));
      } catch (const Error& e) {
        throw ConfigError(std::string("[model] quantizer: ") + e.what());
      }
    }
  }
  r.read_list("model", "n_bits", c.model.n_bits);
  r.read_list("model", "l", c.model.codeword_lengths);
  if (auto v = r.raw("model", "rounding")) {
    const auto s = convert<std::string>("model", "rounding", *v);
    if (s == "exact") c.model.rounding = BitsRounding::exact;
    else if (s == "floor") c.model.rounding = BitsRounding::floor;
    else throw ConfigError("[model] rounding must be exact or floor");
  }
  r.read("model", "leaky_slope", c.model.leaky_slope);
  r.read("model", "width_divisor", c.model.width_divisor);
  r.read("model", "stochastic_eval", c.model.stochastic_eval);

  r.read("train", "batch_size", c.train.batch_size);
  r.read("train", "epochs", c.train.epochs);
  r.read("train", "lr", c.train.initial_lr);
  r.read("train", "patience", c.train.plateau_patience);
  r.read("train", "lr_factor", c.train.lr_factor);
  r.read("train", "beta1", c.train.adam.beta1);
  r.read("train", "beta2", c.train.adam.beta2);
  r.read("train", "eps", c.train.adam.eps);
  r.read("train", "max_samples", c.max_train_samples);

  c.set_seed(seed);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return parse_config(os.str());
}

std::string render_config(const ExperimentConfig& c) {
  std::ostringstream os;
  const SceneConfig& s = c.scene;
  os << "[experiment]\nname = " << c.name << "\nseed = " << c.seed << "\nmode = " << to_string(c.mode)
     << "\nout = " << c.out_dir.string() << "\nformat = " << to_string(c.format) << "\n\n";
  os << "[scene]\nname = " << s.name << "\nn1 = " << s.array.n1 << "\nn2 = " << s.array.n2
     << "\no1 = " << s.array.o1 << "\no2 = " << s.array.o2 << "\nnr = " << s.array.nr << "\nn_rb = " << s.n_rb
     << "\nn_subbands = " << s.n_subbands << "\nn_paths = " << s.n_paths
     << "\ndelay_spread = " << fmt_double(s.delay_spread) << "\ncarrier_hz = " << fmt_double(s.carrier_hz)
     << "\nangle_spread = " << fmt_double(s.angle_spread)
     << "\nsector_half_width = " << fmt_double(s.sector_half_width)
     << "\nzenith_lo = " << fmt_double(s.zenith_lo) << "\nzenith_hi = " << fmt_double(s.zenith_hi)
     << "\nxpr = " << fmt_double(s.xpr) << "\n\n";
  os << "[dataset]\ncount = " << c.dataset.count << "\ntrain = " << fmt_double(c.dataset.split.train)
     << "\nval = " << fmt_double(c.dataset.split.val) << "\ntest = " << fmt_double(c.dataset.split.test)
     << "\nsave_channels = " << (c.dataset.save_channels ? "true" : "false") << "\ndir = " << c.dataset.dir.string()
     << "\n\n";
  os << "[type2]\nk_beams = " << c.type2.k_beams
     << "\nphase = " << (c.type2.phase_mode == PhaseMode::qpsk ? "qpsk" : "8psk")
     << "\nsubband_amplitude = " << (c.type2.subband_amplitude ? "true" : "false") << "\n\n";
  os << "[model]\narchitecture = " << nn::to_string(c.model.arch) << "\nquantizer = " << join(c.model.quantizers);
  if (!c.model.n_bits.empty()) os << "\nn_bits = " << join(c.model.n_bits);
  if (!c.model.codeword_lengths.empty()) os << "\nl = " << join(c.model.codeword_lengths);
  os << "\nrounding = " << (c.model.rounding == BitsRounding::exact ? "exact" : "floor")
     << "\nleaky_slope = " << fmt_double(c.model.leaky_slope) << "\nwidth_divisor = " << c.model.width_divisor
     << "\nstochastic_eval = " << (c.model.stochastic_eval ? "true" : "false") << "\n\n";
  os << "[train]\nbatch_size = " << c.train.batch_size << "\nepochs = " << c.train.epochs
     << "\nlr = " << fmt_double(c.train.initial_lr) << "\npatience = " << c.train.plateau_patience
     << "\nlr_factor = " << fmt_double(c.train.lr_factor) << "\nbeta1 = " << fmt_double(c.train.adam.beta1)
     << "\nbeta2 = " << fmt_double(c.train.adam.beta2) << "\neps = " << fmt_double(c.train.adam.eps)
     << "\nmax_samples = " << c.max_train_samples << "\n";
  return os.str();
}

}  // namespace csifb
