#pragma once

#include "mentor/diff.hpp"
#include "mentor/graph.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace mentor {

// Binary layout, little-endian:
//   "MNTR" | u32 version | u64 header length | header JSON bytes | u64 tensor count |
//   per tensor: u32 name length | name | u32 scalar size (4 or 8) | u64 rows | u64 cols | values
struct CheckpointData {
  nlohmann::json header;
  int scalar_size{8};
  std::map<std::string, FeatureMatrix> tensors;
};

template <typename T>
void save_checkpoint(const std::filesystem::path& file, const nlohmann::json& header, const diff::ParameterStore<T>& params);

CheckpointData read_checkpoint(const std::filesystem::path& file);

/// Copies matching tensors into `params`. Missing names or shape mismatches throw.
template <typename T>
void load_parameters(const CheckpointData& data, diff::ParameterStore<T>& params);

}  // namespace mentor
