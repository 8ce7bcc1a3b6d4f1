// xlalign/text.hpp

// Copyright 2026 The xlalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace xlalign::text {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' ||
         c == '\r';
}

inline bool has_whitespace(std::string_view s) {
  for (char c : s)
    if (is_space(c)) return true;
  return false;
}

// A token is non-empty and carries no whitespace.
inline bool is_single_token(std::string_view s) {
  return !s.empty() && !has_whitespace(s);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Splits on every occurrence of `sep`; empty fields are kept.
inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::vector<std::string> split_list(std::string_view s, char sep = ',') {
  std::vector<std::string> out;
  for (auto field : split(s, sep)) {
    field = trim(field);
    if (!field.empty()) out.emplace_back(field);
  }
  return out;
}

inline std::string join(const std::vector<std::string> &parts,
                        std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  Int value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// Shortest decimal form that parses back to the same double.
inline void append_double(std::string &out, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

inline std::string format_double(double value) {
  std::string out;
  append_double(out, value);
  return out;
}

namespace detail {

inline char32_t decode_utf8(std::string_view s, std::size_t &i) {
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  unsigned char c = byte(i);
  auto continuation = [&](std::size_t k) {
    return k < s.size() && (byte(k) & 0xC0) == 0x80;
  };
  if (c < 0x80) {
    ++i;
    return c;
  }
  if ((c & 0xE0) == 0xC0 && continuation(i + 1)) {
    char32_t cp = ((c & 0x1F) << 6) | (byte(i + 1) & 0x3F);
    i += 2;
    return cp;
  }
  if ((c & 0xF0) == 0xE0 && continuation(i + 1) && continuation(i + 2)) {
    char32_t cp = ((c & 0x0F) << 12) | ((byte(i + 1) & 0x3F) << 6) |
                  (byte(i + 2) & 0x3F);
    i += 3;
    return cp;
  }
  if ((c & 0xF8) == 0xF0 && continuation(i + 1) && continuation(i + 2) &&
      continuation(i + 3)) {
    char32_t cp = ((c & 0x07) << 18) | ((byte(i + 1) & 0x3F) << 12) |
                  ((byte(i + 2) & 0x3F) << 6) | (byte(i + 3) & 0x3F);
    i += 4;
    return cp;
  }
  // Invalid byte: surface it as a sentinel so the caller copies it verbatim.
  ++i;
  return 0xFFFFFFFF;
}

inline void encode_utf8(std::string &out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Simple case mapping for the Latin, Greek and Cyrillic blocks used by
// English and the Turkic languages.
inline char32_t to_lower(char32_t cp) {
  auto even_upper = [](char32_t c) { return (c % 2 == 0) ? c + 1 : c; };
  auto odd_upper = [](char32_t c) { return (c % 2 == 1) ? c + 1 : c; };
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 0x20;
  if (cp == 0x130) return 'i';  // Turkish dotted capital I
  if (cp >= 0x100 && cp <= 0x137) return even_upper(cp);
  if (cp >= 0x139 && cp <= 0x148) return odd_upper(cp);
  if (cp >= 0x14A && cp <= 0x177) return even_upper(cp);
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return odd_upper(cp);
  if (cp == 0x18F) return 0x259;  // schwa
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x460 && cp <= 0x481) return even_upper(cp);
  if (cp >= 0x48A && cp <= 0x4BF) return even_upper(cp);
  if (cp == 0x4C0) return 0x4CF;
  if (cp >= 0x4C1 && cp <= 0x4CE) return odd_upper(cp);
  if (cp >= 0x4D0 && cp <= 0x52F) return even_upper(cp);
  return cp;
}

}  // namespace detail

inline std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t start = i;
    char32_t cp = detail::decode_utf8(s, i);
    if (cp == 0xFFFFFFFF) {
      out += s[start];
      continue;
    }
    detail::encode_utf8(out, detail::to_lower(cp));
  }
  return out;
}

// Language code guessed from a file name: "tr.vec" and "tr-aligned.vec" give
// "tr".
inline std::string language_from_path(const std::filesystem::path &path) {
  std::string stem = path.filename().string();
  std::size_t cut = stem.find_first_of(".-_");
  return stem.substr(0, cut);
}

// Language pair guessed from a dictionary name: "en-tr.tsv" and
// "en_tr.train.tsv" give {"en", "tr"}.
inline std::optional<std::pair<std::string, std::string>> language_pair_from_path(
    const std::filesystem::path &path) {
  std::string stem = path.filename().string();
  stem = stem.substr(0, stem.find('.'));
  std::size_t cut = stem.find_first_of("-_");
  if (cut == std::string::npos || cut == 0) return std::nullopt;
  std::string src = stem.substr(0, cut);
  std::string rest = stem.substr(cut + 1);
  std::string tgt = rest.substr(0, rest.find_first_of("-_"));
  if (tgt.empty()) return std::nullopt;
  return std::make_pair(src, tgt);
}

}  // namespace xlalign::text
