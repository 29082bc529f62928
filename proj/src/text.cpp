#include "axs/text.hpp"

#include <boost/beast/core/detail/base64.hpp>

#include <algorithm>
#include <cctype>

namespace axs::text {

namespace {
bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
char lower(char c) noexcept { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }
char upper(char c) noexcept { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c; }
}  // namespace

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(std::span<const std::string> tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), upper);
  return out;
}

bool iequals(std::string_view a, std::string_view b) noexcept {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) { return lower(x) == lower(y); });
}

bool is_strict_prefix_ci(std::string_view prefix, std::string_view s) noexcept {
  return prefix.size() < s.size() && iequals(prefix, s.substr(0, prefix.size()));
}

bool is_ascii_punct(char c) noexcept {
  return std::ispunct(static_cast<unsigned char>(c)) != 0 && static_cast<unsigned char>(c) < 0x80;
}

TokenParts split_token(std::string_view token) noexcept {
  std::size_t b = 0;
  std::size_t e = token.size();
  while (b < e && is_ascii_punct(token[b])) ++b;
  while (e > b && is_ascii_punct(token[e - 1])) --e;
  return {token.substr(0, b), token.substr(b, e - b), token.substr(e)};
}

std::string_view trim_punct(std::string_view token) noexcept { return split_token(token).core; }

bool starts_upper(std::string_view s) noexcept {
  if (s.empty()) return false;
  auto c0 = static_cast<unsigned char>(s[0]);
  if (c0 < 0x80) return c0 >= 'A' && c0 <= 'Z';
  // U+00C0..U+00DE (except U+00D7) encode as C3 80..C3 9E
  if (c0 == 0xC3 && s.size() > 1) {
    auto c1 = static_cast<unsigned char>(s[1]);
    return c1 >= 0x80 && c1 <= 0x9E && c1 != 0x97;
  }
  return false;
}

std::string capitalize_first(std::string_view s) {
  std::string out(s);
  if (out.empty()) return out;
  auto c0 = static_cast<unsigned char>(out[0]);
  if (c0 < 0x80) {
    out[0] = upper(out[0]);
  } else if (c0 == 0xC3 && out.size() > 1) {
    auto c1 = static_cast<unsigned char>(out[1]);
    // U+00E0..U+00FE (except U+00F7) -> subtract 0x20
    if (c1 >= 0xA0 && c1 <= 0xBE && c1 != 0xB7) out[1] = static_cast<char>(c1 - 0x20);
  }
  return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  namespace b64 = boost::beast::detail::base64;
  std::string out(b64::encoded_size(bytes.size()), '\0');
  out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view s) {
  namespace b64 = boost::beast::detail::base64;
  std::size_t body = s.size();
  while (body > 0 && s[body - 1] == '=') --body;
  if (s.size() % 4 != 0 || s.size() - body > 2) return std::nullopt;
  std::vector<std::uint8_t> out(b64::decoded_size(s.size()));
  auto [written, consumed] = b64::decode(out.data(), s.data(), s.size());
  if (consumed != body) return std::nullopt;
  out.resize(written);
  return out;
}

}  // namespace axs::text
