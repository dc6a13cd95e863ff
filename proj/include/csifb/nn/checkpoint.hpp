// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint container:
//   "CSIFBCKPT\n" then "key=value\n" metadata lines, terminated by "end\n";
//   then per parameter block: u32 name length, name bytes, u32 rows,
//   u32 cols, rows*cols little-endian float32 values (column-major).
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "csifb/nn/model.hpp"

namespace csifb::nn {

std::map<std::string, std::string> spec_metadata(const ModelSpec& spec);
ModelSpec spec_from_metadata(const std::map<std::string, std::string>& meta);

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Model<T>& model,
                     const std::map<std::string, std::string>& extra = {});

struct LoadedMetadata {
  ModelSpec spec;
  std::map<std::string, std::string> meta;
};

LoadedMetadata read_checkpoint_metadata(const std::filesystem::path& path);

/// Builds a model from the checkpoint's metadata and loads its parameters.
template <typename T>
std::unique_ptr<Model<T>> load_checkpoint(const std::filesystem::path& path);

}  // namespace csifb::nn
