#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace axs::text {

/// Split on ASCII whitespace; never yields empty tokens.
std::vector<std::string> split_whitespace(std::string_view s);

std::string join(std::span<const std::string> tokens, std::string_view sep = " ");

/// Lowercases ASCII letters only; other bytes (UTF-8 continuation etc.) pass through.
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

bool iequals(std::string_view a, std::string_view b) noexcept;

/// True if `prefix` is a strict (shorter) case-insensitive prefix of `s`.
bool is_strict_prefix_ci(std::string_view prefix, std::string_view s) noexcept;

bool is_ascii_punct(char c) noexcept;

/// Removes leading and trailing ASCII punctuation.
std::string_view trim_punct(std::string_view token) noexcept;

/// Splits a token into (leading punctuation, core, trailing punctuation).
struct TokenParts {
  std::string_view lead;
  std::string_view core;
  std::string_view trail;
};
TokenParts split_token(std::string_view token) noexcept;

bool starts_upper(std::string_view s) noexcept;

/// Uppercases the first character. Handles ASCII and the Latin-1 block of
/// two-byte UTF-8 sequences (e.g. "équipe" -> "Équipe").
std::string capitalize_first(std::string_view s);

/// Base64 (RFC 4648, padded).
std::string base64_encode(std::span<const std::uint8_t> bytes);
std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view s);

}  // namespace axs::text
