// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#ifndef MMPHASE_UTIL_HPP
#define MMPHASE_UTIL_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmphase {

// Bad configuration or usage; maps to exit code 2 at the tool boundary.
// Everything else thrown as std::runtime_error maps to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
void write_binary_file(const std::filesystem::path& path, const void* data, std::size_t size);

// FNV-1a, used for corpus/artifact fingerprints. Not cryptographic.
std::uint64_t fnv1a64_bytes(const void* data, std::size_t size,
                            std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ull);
std::string fingerprint_hex(std::uint64_t h);
std::string file_fingerprint(const std::filesystem::path& path);

std::string trim(std::string_view s);
std::string lower_ascii(std::string_view s);

// Splits on runs of non-alphanumeric bytes. ASCII letters are lowercased,
// bytes >= 0x80 are kept verbatim so UTF-8 sequences stay inside tokens.
// Hashtag markers and @ fall on boundaries, so "#refugees" yields "refugees".
std::vector<std::string> word_tokens(std::string_view text);

std::string format_double(double v);  // shortest round-trippable decimal

// RFC-4180 quoting: wraps in quotes when the value contains comma, quote or
// newline; embedded quotes doubled.
std::string csv_escape(std::string_view value);

}  // namespace mmphase

#endif
