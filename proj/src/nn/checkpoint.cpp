// SPDX-License-Identifier: Apache-2.0
#include "csifb/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "csifb/errors.hpp"

namespace csifb::nn {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

namespace {

constexpr const char* kMagic = "CSIFBCKPT";

void write_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  if (!is) throw IoError("checkpoint truncated");
  return v;
}

std::map<std::string, std::string> read_header(std::istream& is, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(is, line) || line != kMagic)
    throw IoError("not a checkpoint file: " + path.string());
  std::map<std::string, std::string> meta;
  while (std::getline(is, line)) {
    if (line == "end") return meta;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("bad checkpoint header line in " + path.string());
    meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  throw IoError("checkpoint header not terminated: " + path.string());
}

const std::string& need(const std::map<std::string, std::string>& m, const std::string& k) {
  const auto it = m.find(k);
  if (it == m.end()) throw ConfigError("checkpoint metadata missing '" + k + "'");
  return it->second;
}

}  // namespace

std::map<std::string, std::string> spec_metadata(const ModelSpec& spec) {
  std::ostringstream slope;
  slope.precision(17);
  slope << spec.leaky_slope;
  return {{"architecture", to_string(spec.arch)},
          {"nt", std::to_string(spec.nt)},
          {"ns", std::to_string(spec.ns)},
          {"l", std::to_string(spec.l)},
          {"quantizer", spec.quantizer.to_string()},
          {"leaky_slope", slope.str()},
          {"width_divisor", std::to_string(spec.width_divisor)},
          {"init_seed", std::to_string(spec.init_seed)}};
}

ModelSpec spec_from_metadata(const std::map<std::string, std::string>& meta) {
  ModelSpec s;
  try {
    s.arch = parse_architecture(need(meta, "architecture"));
    s.nt = std::stoi(need(meta, "nt"));
    s.ns = std::stoi(need(meta, "ns"));
    s.l = std::stoi(need(meta, "l"));
    s.quantizer = QuantizerSpec::parse(need(meta, "quantizer"));
    s.leaky_slope = std::stod(need(meta, "leaky_slope"));
    s.width_divisor = std::stoi(need(meta, "width_divisor"));
    s.init_seed = std::stoull(need(meta, "init_seed"));
  } catch (const std::invalid_argument&) {
    throw ConfigError("checkpoint metadata has a non-numeric field");
  }
  s.validate();
  return s;
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Model<T>& model,
                     const std::map<std::string, std::string>& extra) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write checkpoint " + path.string());
  os << kMagic << '\n';
  auto meta = spec_metadata(model.spec());
  for (const auto& [k, v] : extra) meta.emplace(k, v);
  for (const auto& [k, v] : meta) os << k << '=' << v << '\n';
  os << "end\n";
  for (const Param<T>* p : model.params()) {
    write_u32(os, static_cast<std::uint32_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_u32(os, static_cast<std::uint32_t>(p->value.rows()));
    write_u32(os, static_cast<std::uint32_t>(p->value.cols()));
    const Eigen::MatrixXf f = p->value.template cast<float>();
    os.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * 4));
  }
  if (!os) throw IoError("write failed: " + path.string());
}

LoadedMetadata read_checkpoint_metadata(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path.string());
  LoadedMetadata m;
  m.meta = read_header(is, path);
  m.spec = spec_from_metadata(m.meta);
  return m;
}

template <typename T>
std::unique_ptr<Model<T>> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path.string());
  const ModelSpec spec = spec_from_metadata(read_header(is, path));
  auto model = std::make_unique<Model<T>>(spec);
  for (Param<T>* p : model->params()) {
    const std::uint32_t len = read_u32(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    const std::uint32_t rows = read_u32(is), cols = read_u32(is);
    if (name != p->name || rows != p->value.rows() || cols != p->value.cols())
      throw ContractError("checkpoint/spec mismatch at parameter '" + p->name + "' (file has '" +
                          name + "')");
    Eigen::MatrixXf f(rows, cols);
    is.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size() * 4));
    if (!is) throw IoError("checkpoint truncated: " + path.string());
    p->value = f.cast<T>();
  }
  return model;
}

template void save_checkpoint<float>(const std::filesystem::path&, const Model<float>&,
                                     const std::map<std::string, std::string>&);
template void save_checkpoint<double>(const std::filesystem::path&, const Model<double>&,
                                      const std::map<std::string, std::string>&);
template std::unique_ptr<Model<float>> load_checkpoint<float>(const std::filesystem::path&);
template std::unique_ptr<Model<double>> load_checkpoint<double>(const std::filesystem::path&);

}  // namespace csifb::nn
