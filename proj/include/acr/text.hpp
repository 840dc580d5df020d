#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace acr {

/// Byte offset of every Unicode scalar value in `text`, plus a final entry
/// equal to text.size(). Ill-formed sequences count one scalar per byte.
std::vector<std::size_t> scalar_offsets(std::string_view text);

/// Number of Unicode scalar values in a UTF-8 string.
std::size_t scalar_length(std::string_view text);

/// Lowercase (simple case folding) and split on every non-alphanumeric
/// scalar value. Empty pieces are dropped; no stopword removal.
std::vector<std::string> tokenize(std::string_view text);

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

std::uint32_t crc32(std::string_view bytes) noexcept;
std::uint32_t crc32(std::uint32_t running, std::string_view bytes) noexcept;

std::string trim(std::string_view s);

}  // namespace acr
