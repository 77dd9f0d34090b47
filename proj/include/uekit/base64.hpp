#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uekit::base64 {

// Standard alphabet, '=' padding, no line wrapping.
std::string encode(std::span<const std::uint8_t> bytes);

// Throws Error(kMalformedInput) on characters outside the alphabet or bad
// padding.
std::vector<std::uint8_t> decode(std::string_view text);

// float32 little-endian row-major packing used by the record format.
std::string encode_f32le(std::span<const float> values);
std::vector<float> decode_f32le(std::string_view text);

}  // namespace uekit::base64
