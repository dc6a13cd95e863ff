// SPDX-License-Identifier: Apache-2.0
//
// Dataset files. Little-endian, 48-byte header:
//   0  char[4] magic "CSIF"
//   4  u32     format version (1)
//   8  u32     kind: 0 channel, 1 eigen_single, 2 eigen_multi
//  12  u32     nt
//  16  u32     nr
//  20  u32     ns (subbands; RB count for channel files)
//  24  u64     sample_count
//  32  u64     scene digest
//  40  u64     seed
// followed by sample_count samples of float32 (re, im) pairs, column-major:
// channel samples are the nr x nt RB slices in RB order, eigen samples the
// nt x ns eigen matrix.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "csifb/channel_synth.hpp"
#include "csifb/nn/layers.hpp"
#include "csifb/types.hpp"

namespace csifb {

enum class DatasetKind : std::uint32_t { channel = 0, eigen_single = 1, eigen_multi = 2 };

std::string to_string(DatasetKind k);

struct DatasetHeader {
  static constexpr std::uint32_t kVersion = 1;
  static constexpr std::size_t kBytes = 48;

  DatasetKind kind = DatasetKind::eigen_single;
  std::uint32_t nt = 0;
  std::uint32_t nr = 0;
  std::uint32_t ns = 0;
  std::uint64_t sample_count = 0;
  std::uint64_t scene_digest = 0;
  std::uint64_t seed = 0;

  /// Complex entries per sample.
  std::uint64_t sample_elements() const noexcept;
  /// Shape of one sample as stored (rows x cols of the complex matrix).
  Eigen::Index sample_rows() const noexcept;
  Eigen::Index sample_cols() const noexcept;
};

/// Streams samples to disk; the header's sample_count must match the number
/// of samples appended before close().
class DatasetWriter {
 public:
  DatasetWriter(const std::filesystem::path& path, const DatasetHeader& header);
  ~DatasetWriter();
  void append(const CMat& sample);
  void close();

 private:
  std::filesystem::path path_;
  DatasetHeader header_;
  std::ofstream os_;
  std::uint64_t written_ = 0;
  std::vector<float> buf_;
};

struct Dataset {
  DatasetHeader header;
  std::vector<CMat> samples;
};

DatasetHeader read_dataset_header(const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const Dataset& ds);

/// Eigen dataset as real [Re; Im] columns (2*nt*ns x sample_count).
template <typename T>
nn::Mat<T> load_real_matrix(const std::filesystem::path& path, DatasetHeader* header = nullptr);

/// FNV-1a 64 of the file bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct SplitCounts {
  std::uint64_t train = 0, val = 0, test = 0;
};

/// val = floor(count*val), test = floor(count*test), train gets the rest.
SplitCounts split_counts(std::uint64_t count, const SplitFractions& f);

struct DatasetFiles {
  std::filesystem::path train, val, test;                       // eigen targets
  std::filesystem::path train_channel, val_channel, test_channel;  // empty if not saved
};

DatasetFiles dataset_paths(const std::filesystem::path& dir, bool with_channels);

/// Generates count drops of the scene, shuffles them (seeded by the scene
/// seed), splits train/val/test and writes eigen targets (and optionally the
/// channels) under dir.
DatasetFiles synth_dataset(const SceneConfig& scene, std::uint64_t count, const SplitFractions& split,
                           const std::filesystem::path& dir, bool save_channels);

}  // namespace csifb
