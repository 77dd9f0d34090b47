#include "uekit/tensor/checkpoint_file.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "uekit/error.hpp"

namespace uekit::tensor {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw Error(ErrorKind::kCheckpoint, what);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

std::uint64_t get_u64(const std::string& s, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[at + b])) << (8 * b);
  }
  return v;
}

}  // namespace

std::string encode_checkpoint(const CheckpointFile& file) {
  nlohmann::ordered_json header;
  header["format_version"] = kCheckpointFormatVersion;
  header["metadata"] = file.metadata;
  header["tensors"] = nlohmann::ordered_json::array();
  std::string blob;
  for (const auto& [name, t] : file.tensors) {
    nlohmann::ordered_json entry;
    entry["name"] = name;
    entry["shape"] = {t.rows, t.cols};
    entry["offset"] = blob.size();
    entry["nbytes"] = t.size() * 4;
    header["tensors"].push_back(std::move(entry));
    for (double x : t.data) put_u32(blob, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
  }
  const std::string text = header.dump();
  std::string out;
  out.reserve(8 + text.size() + blob.size());
  const auto len = static_cast<std::uint64_t>(text.size());
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((len >> (8 * b)) & 0xFF));
  out += text;
  out += blob;
  return out;
}

CheckpointFile decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < 8) fail("corrupt header: file shorter than the length prefix");
  const std::uint64_t len = get_u64(bytes, 0);
  if (len > bytes.size() - 8) fail("corrupt header: header length exceeds file size");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 8,
                                   bytes.begin() + 8 + static_cast<std::ptrdiff_t>(len));
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("corrupt header: ") + e.what());
  }
  if (!header.is_object() || !header.contains("format_version") ||
      !header["format_version"].is_number_integer()) {
    fail("corrupt header: missing format_version");
  }
  const int version = header["format_version"].get<int>();
  if (version != kCheckpointFormatVersion) {
    fail("format version mismatch: file has " + std::to_string(version) + ", expected " +
         std::to_string(kCheckpointFormatVersion));
  }
  if (!header.contains("tensors") || !header["tensors"].is_array()) {
    fail("corrupt header: missing tensor table");
  }

  CheckpointFile file;
  file.metadata = header.value("metadata", nlohmann::ordered_json::object());
  const std::size_t blob_start = 8 + len;
  const std::size_t blob_size = bytes.size() - blob_start;
  try {
    for (const auto& entry : header["tensors"]) {
      const auto name = entry.at("name").get<std::string>();
      const auto rows = entry.at("shape").at(0).get<std::size_t>();
      const auto cols = entry.at("shape").at(1).get<std::size_t>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto nbytes = entry.at("nbytes").get<std::size_t>();
      if (nbytes != rows * cols * 4) fail("corrupt header: tensor '" + name + "' size mismatch");
      if (offset > blob_size || nbytes > blob_size - offset) {
        fail("truncated blob: tensor '" + name + "' extends past end of file");
      }
      Tensor t(rows, cols);
      for (std::size_t i = 0; i < t.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) {
          bits |= static_cast<std::uint32_t>(
                      static_cast<unsigned char>(bytes[blob_start + offset + 4 * i + b]))
                  << (8 * b);
        }
        t.data[i] = static_cast<double>(std::bit_cast<float>(bits));
      }
      file.tensors.emplace_back(name, std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("corrupt header: ") + e.what());
  }
  return file;
}

void write_checkpoint_file(const std::filesystem::path& path, const CheckpointFile& file) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  const std::string bytes = encode_checkpoint(file);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

CheckpointFile read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace uekit::tensor
