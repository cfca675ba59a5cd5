#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace proswitch::text {

// Canonical composed form (NFC). Invalid UTF-8 sequences become U+FFFD.
std::string to_nfc(std::string_view s);

// Full Unicode lowercase mapping (root locale).
std::string to_lower(std::string_view s);

// Trims and collapses every run of whitespace into a single ASCII space.
std::string collapse_whitespace(std::string_view s);

// NFC + lowercase + whitespace collapse. Used for lexicon terms.
std::string normalize_term(std::string_view s);

// NFC + lowercase, with each ASCII whitespace byte replaced by ' '.
// Byte offsets into the result are what the matcher reports.
std::string normalize_for_matching(std::string_view s);

// True when the code point ending right before `pos` is a letter or digit.
bool word_char_before(std::string_view s, std::size_t pos);
// True when the code point starting at `pos` is a letter or digit.
bool word_char_at(std::string_view s, std::size_t pos);

// Number of code points; invalid bytes count as one each.
std::size_t codepoint_count(std::string_view s);

std::string trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);

std::string sha256_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace proswitch::text
