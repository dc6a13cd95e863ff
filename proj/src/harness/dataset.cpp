// SPDX-License-Identifier: Apache-2.0
#include "csifb/harness/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <numeric>
#include <optional>
#include <sstream>

#include "csifb/eigen_target.hpp"
#include "csifb/errors.hpp"
#include "csifb/rng.hpp"

namespace csifb {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

namespace {

constexpr char kMagic[4] = {'C', 'S', 'I', 'F'};

template <typename U>
void put(char* dst, U v) {
  std::memcpy(dst, &v, sizeof(U));
}
template <typename U>
U get(const char* src) {
  U v;
  std::memcpy(&v, src, sizeof(U));
  return v;
}

void check_header(const DatasetHeader& h) {
  if (h.nt == 0 || h.ns == 0) throw ContractError("dataset header: nt and ns must be > 0");
  if (h.kind == DatasetKind::channel && h.nr == 0) throw ContractError("dataset header: nr must be > 0");
  if (h.kind == DatasetKind::eigen_single && h.ns != 1)
    throw ContractError("dataset header: eigen_single requires ns = 1");
}

}  // namespace

std::string to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::channel: return "channel";
    case DatasetKind::eigen_single: return "eigen_single";
    case DatasetKind::eigen_multi: return "eigen_multi";
  }
  return "?";
}

std::uint64_t DatasetHeader::sample_elements() const noexcept {
  return static_cast<std::uint64_t>(sample_rows()) * static_cast<std::uint64_t>(sample_cols());
}
Eigen::Index DatasetHeader::sample_rows() const noexcept {
  return kind == DatasetKind::channel ? nr : nt;
}
Eigen::Index DatasetHeader::sample_cols() const noexcept {
  return kind == DatasetKind::channel ? static_cast<Eigen::Index>(nt) * ns : ns;
}

DatasetWriter::DatasetWriter(const std::filesystem::path& path, const DatasetHeader& header)
    : path_(path), header_(header) {
  check_header(header_);
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  os_.open(path_, std::ios::binary | std::ios::trunc);
  if (!os_) throw IoError("cannot write dataset " + path_.string());
  char buf[DatasetHeader::kBytes] = {};
  std::memcpy(buf, kMagic, 4);
  put<std::uint32_t>(buf + 4, DatasetHeader::kVersion);
  put<std::uint32_t>(buf + 8, static_cast<std::uint32_t>(header_.kind));
  put<std::uint32_t>(buf + 12, header_.nt);
  put<std::uint32_t>(buf + 16, header_.nr);
  put<std::uint32_t>(buf + 20, header_.ns);
  put<std::uint64_t>(buf + 24, header_.sample_count);
  put<std::uint64_t>(buf + 32, header_.scene_digest);
  put<std::uint64_t>(buf + 40, header_.seed);
  os_.write(buf, sizeof buf);
  buf_.resize(2 * header_.sample_elements());
}

DatasetWriter::~DatasetWriter() {
  if (os_.is_open()) os_.close();
}

void DatasetWriter::append(const CMat& sample) {
  if (sample.rows() != header_.sample_rows() || sample.cols() != header_.sample_cols())
    throw ContractError("dataset sample shape mismatch for " + path_.string());
  if (written_ >= header_.sample_count) throw ContractError("more samples than declared in header");
  const Eigen::Index n = sample.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    buf_[2 * k] = static_cast<float>(sample.data()[k].real());
    buf_[2 * k + 1] = static_cast<float>(sample.data()[k].imag());
  }
  os_.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size() * 4));
  if (!os_) throw IoError("write failed: " + path_.string());
  ++written_;
}

void DatasetWriter::close() {
  if (written_ != header_.sample_count)
    throw ContractError("dataset " + path_.string() + ": wrote " + std::to_string(written_) +
                        " samples, header declares " + std::to_string(header_.sample_count));
  os_.close();
  if (!os_) throw IoError("close failed: " + path_.string());
}

DatasetHeader read_dataset_header(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open dataset " + path.string());
  char buf[DatasetHeader::kBytes];
  is.read(buf, sizeof buf);
  if (!is || std::memcmp(buf, kMagic, 4) != 0) throw IoError("not a CSIF dataset: " + path.string());
  if (get<std::uint32_t>(buf + 4) != DatasetHeader::kVersion)
    throw IoError("unsupported dataset version in " + path.string());
  DatasetHeader h;
  const auto kind = get<std::uint32_t>(buf + 8);
  if (kind > 2) throw IoError("unknown dataset kind in " + path.string());
  h.kind = static_cast<DatasetKind>(kind);
  h.nt = get<std::uint32_t>(buf + 12);
  h.nr = get<std::uint32_t>(buf + 16);
  h.ns = get<std::uint32_t>(buf + 20);
  h.sample_count = get<std::uint64_t>(buf + 24);
  h.scene_digest = get<std::uint64_t>(buf + 32);
  h.seed = get<std::uint64_t>(buf + 40);
  check_header(h);
  const auto expected = DatasetHeader::kBytes + h.sample_count * h.sample_elements() * 8;
  if (std::filesystem::file_size(path) != expected)
    throw IoError("dataset payload length mismatch in " + path.string() + " (expected " +
                  std::to_string(expected) + " bytes)");
  return h;
}

Dataset read_dataset(const std::filesystem::path& path) {
  Dataset ds;
  ds.header = read_dataset_header(path);
  std::ifstream is(path, std::ios::binary);
  is.seekg(DatasetHeader::kBytes);
  std::vector<float> buf(2 * ds.header.sample_elements());
  ds.samples.reserve(ds.header.sample_count);
  for (std::uint64_t i = 0; i < ds.header.sample_count; ++i) {
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
    if (!is) throw IoError("dataset truncated: " + path.string());
    CMat m(ds.header.sample_rows(), ds.header.sample_cols());
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = cd(buf[2 * k], buf[2 * k + 1]);
    ds.samples.push_back(std::move(m));
  }
  return ds;
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  DatasetHeader h = ds.header;
  h.sample_count = ds.samples.size();
  DatasetWriter w(path, h);
  for (const CMat& s : ds.samples) w.append(s);
  w.close();
}

template <typename T>
nn::Mat<T> load_real_matrix(const std::filesystem::path& path, DatasetHeader* header) {
  const DatasetHeader h = read_dataset_header(path);
  if (h.kind == DatasetKind::channel)
    throw ContractError("expected an eigen dataset, got a channel dataset: " + path.string());
  if (header) *header = h;
  const Eigen::Index n = static_cast<Eigen::Index>(h.sample_elements());
  nn::Mat<T> out(2 * n, static_cast<Eigen::Index>(h.sample_count));
  std::ifstream is(path, std::ios::binary);
  is.seekg(DatasetHeader::kBytes);
  std::vector<float> buf(2 * n);
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
    if (!is) throw IoError("dataset truncated: " + path.string());
    for (Eigen::Index k = 0; k < n; ++k) {
      out(k, j) = static_cast<T>(buf[2 * k]);
      out(n + k, j) = static_cast<T>(buf[2 * k + 1]);
    }
  }
  return out;
}

template nn::Mat<float> load_real_matrix<float>(const std::filesystem::path&, DatasetHeader*);
template nn::Mat<double> load_real_matrix<double>(const std::filesystem::path&, DatasetHeader*);

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (is) {
    is.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

SplitCounts split_counts(std::uint64_t count, const SplitFractions& f) {
  if (f.train < 0 || f.val < 0 || f.test < 0 || std::abs(f.train + f.val + f.test - 1.0) > 1e-9)
    throw ConfigError("split fractions must be nonnegative and sum to 1");
  SplitCounts c;
  c.val = static_cast<std::uint64_t>(std::floor(static_cast<double>(count) * f.val + 1e-9));
  c.test = static_cast<std::uint64_t>(std::floor(static_cast<double>(count) * f.test + 1e-9));
  c.train = count - c.val - c.test;
  return c;
}

DatasetFiles dataset_paths(const std::filesystem::path& dir, bool with_channels) {
  DatasetFiles f{dir / "train_eigen.csif", dir / "val_eigen.csif", dir / "test_eigen.csif", {}, {}, {}};
  if (with_channels) {
    f.train_channel = dir / "train_channel.csif";
    f.val_channel = dir / "val_channel.csif";
    f.test_channel = dir / "test_channel.csif";
  }
  return f;
}

DatasetFiles synth_dataset(const SceneConfig& scene, std::uint64_t count, const SplitFractions& split,
                           const std::filesystem::path& dir, bool save_channels) {
  scene.validate();
  const SplitCounts sc = split_counts(count, split);
  std::vector<std::uint64_t> order(count);
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  Rng rng(mix64(scene.seed ^ 0x5348554646ull));
  for (std::uint64_t i = count; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  const bool multi = scene.n_rb > 1;
  DatasetHeader eh;
  eh.kind = multi ? DatasetKind::eigen_multi : DatasetKind::eigen_single;
  eh.nt = static_cast<std::uint32_t>(scene.array.nt());
  eh.nr = static_cast<std::uint32_t>(scene.array.nr);
  eh.ns = static_cast<std::uint32_t>(multi ? scene.n_subbands : 1);
  eh.scene_digest = scene.digest();
  eh.seed = scene.seed;
  DatasetHeader ch = eh;
  ch.kind = DatasetKind::channel;
  ch.ns = static_cast<std::uint32_t>(scene.n_rb);

  const DatasetFiles files = dataset_paths(dir, save_channels);
  const std::filesystem::path eig[3] = {files.train, files.val, files.test};
  const std::filesystem::path chn[3] = {files.train_channel, files.val_channel, files.test_channel};
  const std::uint64_t sizes[3] = {sc.train, sc.val, sc.test};
  std::uint64_t cursor = 0;
  for (int part = 0; part < 3; ++part) {
    eh.sample_count = ch.sample_count = sizes[part];
    DatasetWriter ew(eig[part], eh);
    std::optional<DatasetWriter> cw;
    if (save_channels) cw.emplace(chn[part], ch);
    for (std::uint64_t i = 0; i < sizes[part]; ++i, ++cursor) {
      const ChannelSample sample = synth_channel(scene, order[cursor]);
      const EigenTarget t = multi ? subband_eigenvectors(sample, scene.n_subbands) : single_rb_target(sample);
      ew.append(t.v);
      if (cw) {
        CMat flat(sample.h.front().rows(), sample.h.front().cols() * sample.n_rb());
        for (int n = 0; n < sample.n_rb(); ++n)
          flat.middleCols(static_cast<Eigen::Index>(n) * sample.h[n].cols(), sample.h[n].cols()) = sample.h[n];
        cw->append(flat);
      }
    }
    ew.close();
    if (cw) cw->close();
  }
  return files;
}

}  // namespace csifb
