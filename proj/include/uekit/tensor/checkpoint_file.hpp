#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "uekit/tensor/tensor.hpp"

namespace uekit::tensor {

inline constexpr int kCheckpointFormatVersion = 1;

// Single-file checkpoint:
//   u64 little-endian header length H
//   H bytes of JSON: {"format_version", "metadata", "tensors": [
//       {"name", "shape": [rows, cols], "offset", "nbytes"}, ...]}
//   raw float32 little-endian blobs; offsets are relative to the blob start.
struct CheckpointFile {
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, Tensor>> tensors;
};

std::string encode_checkpoint(const CheckpointFile& file);
// Throws Error(kCheckpoint) with "format version mismatch", "corrupt header"
// or "truncated blob".
CheckpointFile decode_checkpoint(const std::string& bytes);

void write_checkpoint_file(const std::filesystem::path& path, const CheckpointFile& file);
CheckpointFile read_checkpoint_file(const std::filesystem::path& path);

}  // namespace uekit::tensor
