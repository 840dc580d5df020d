#include "acr/text.hpp"

#include <algorithm>

#include <unicode/uchar.h>
#include <unicode/utf8.h>
#include <zlib.h>

namespace acr {

std::vector<std::size_t> scalar_offsets(std::string_view text) {
    std::vector<std::size_t> offsets;
    offsets.reserve(text.size() + 1);
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
    const auto length = static_cast<std::int32_t>(text.size());
    std::int32_t i = 0;
    while (i < length) {
        offsets.push_back(static_cast<std::size_t>(i));
        UChar32 c;
        U8_NEXT(bytes, i, length, c);
        (void)c;
    }
    offsets.push_back(text.size());
    return offsets;
}

std::size_t scalar_length(std::string_view text) {
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
    const auto length = static_cast<std::int32_t>(text.size());
    std::size_t n = 0;
    for (std::int32_t i = 0; i < length; ++n) {
        UChar32 c;
        U8_NEXT(bytes, i, length, c);
        (void)c;
    }
    return n;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
    const auto length = static_cast<std::int32_t>(text.size());
    std::int32_t i = 0;
    while (i < length) {
        UChar32 c;
        U8_NEXT(bytes, i, length, c);
        if (c >= 0 && u_isalnum(c)) {
            const UChar32 folded = u_foldCase(c, U_FOLD_CASE_DEFAULT);
            char buf[U8_MAX_LENGTH];
            std::int32_t n = 0;
            U8_APPEND_UNSAFE(buf, n, folded);
            current.append(buf, static_cast<std::size_t>(n));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint32_t crc32(std::uint32_t running, std::string_view bytes) noexcept {
    uLong crc = running;
    // zlib takes uInt lengths; feed large buffers in slices.
    while (!bytes.empty()) {
        const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size(), 1u << 30));
        crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), n);
        bytes.remove_prefix(n);
    }
    return static_cast<std::uint32_t>(crc);
}

std::uint32_t crc32(std::string_view bytes) noexcept { return crc32(0u, bytes); }

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace acr
