// xlalign/dictionary.hpp

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

#include <algorithm>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "xlalign/error.hpp"
#include "xlalign/log.hpp"
#include "xlalign/text.hpp"

namespace xlalign {

struct WordPair {
  std::string src;
  std::string tgt;

  friend auto operator<=>(const WordPair &, const WordPair &) = default;
  friend bool operator==(const WordPair &, const WordPair &) = default;
};

struct WordPairHash {
  std::size_t operator()(const WordPair &p) const noexcept {
    std::size_t h = std::hash<std::string>{}(p.src);
    return h ^ (std::hash<std::string>{}(p.tgt) + 0x9e3779b97f4a7c15ULL + (h << 6) +
                (h >> 2));
  }
};

/// Ordered bilingual word pairs. Several targets per source are legal.
struct DictionaryPairs {
  std::string src_lang;
  std::string tgt_lang;
  std::vector<WordPair> pairs;
  std::string provenance = "file";

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }

  // Distinct source words in order of first appearance.
  std::vector<std::string> source_words() const {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto &p : pairs)
      if (seen.insert(p.src).second) out.push_back(p.src);
    return out;
  }

  bool has_duplicates() const {
    std::unordered_set<WordPair, WordPairHash> seen;
    for (const auto &p : pairs)
      if (!seen.insert(p).second) return true;
    return false;
  }

  friend bool operator==(const DictionaryPairs &, const DictionaryPairs &) = default;
};

// Swaps the roles of the two languages.
inline DictionaryPairs transposed(const DictionaryPairs &dict) {
  DictionaryPairs out{dict.tgt_lang, dict.src_lang, {}, dict.provenance};
  out.pairs.reserve(dict.size());
  for (const auto &p : dict.pairs) out.pairs.push_back({p.tgt, p.src});
  return out;
}

// Returns `dict` oriented `from` -> `to`, transposing when it is stored the
// other way round.
inline DictionaryPairs oriented(const DictionaryPairs &dict, const std::string &from,
                                const std::string &to) {
  if (dict.src_lang == from && dict.tgt_lang == to) return dict;
  if (dict.src_lang == to && dict.tgt_lang == from) return transposed(dict);
  throw DataError("dictionary " + dict.src_lang + "-" + dict.tgt_lang +
                  " does not connect " + from + " and " + to);
}

namespace detail {

inline std::vector<WordPair> dedupe(const std::vector<WordPair> &pairs) {
  std::vector<WordPair> out;
  out.reserve(pairs.size());
  std::unordered_set<WordPair, WordPairHash> seen;
  for (const auto &p : pairs)
    if (seen.insert(p).second) out.push_back(p);
  return out;
}

}  // namespace detail

/// Drops repeated pairs (first kept) and pairs with a multi-token side.
inline DictionaryPairs clean_dictionary(const DictionaryPairs &dict) {
  DictionaryPairs out{dict.src_lang, dict.tgt_lang, {}, dict.provenance};
  std::size_t multi = 0;
  for (const auto &p : detail::dedupe(dict.pairs)) {
    if (text::is_single_token(p.src) && text::is_single_token(p.tgt)) {
      out.pairs.push_back(p);
    } else {
      ++multi;
    }
  }
  log::debug("dict-clean", std::to_string(dict.size() - out.size() - multi) +
                               " duplicates, " + std::to_string(multi) +
                               " multi-token pairs removed");
  return out;
}

/// Concatenates `a` then `b` and removes repeated pairs.
inline DictionaryPairs merge_dictionaries(const DictionaryPairs &a,
                                          const DictionaryPairs &b,
                                          bool drop_multi_token = false) {
  if (a.src_lang != b.src_lang || a.tgt_lang != b.tgt_lang)
    throw DataError("cannot merge " + a.src_lang + "-" + a.tgt_lang + " with " +
                    b.src_lang + "-" + b.tgt_lang);
  std::vector<WordPair> all = a.pairs;
  all.insert(all.end(), b.pairs.begin(), b.pairs.end());
  DictionaryPairs out{a.src_lang, a.tgt_lang, detail::dedupe(all), "merged"};
  if (drop_multi_token) {
    out = clean_dictionary(out);
    out.provenance = "merged";
  }
  return out;
}

struct DictionarySplit {
  DictionaryPairs train;
  DictionaryPairs test;
};

/// Holds out every pair of `test_size` distinct source words drawn uniformly
/// with `seed`. Both halves keep the input order.
inline DictionarySplit split_dictionary(const DictionaryPairs &dict,
                                        std::size_t test_size, std::uint64_t seed) {
  std::vector<std::string> sources = dict.source_words();
  if (test_size == 0) throw UsageError("test size must be positive");
  if (test_size >= sources.size())
    throw UsageError("test size " + std::to_string(test_size) +
                     " must be smaller than the " + std::to_string(sources.size()) +
                     " distinct source words");
  std::mt19937_64 rng(seed);
  std::shuffle(sources.begin(), sources.end(), rng);
  std::unordered_set<std::string> held(sources.begin(),
                                       sources.begin() + static_cast<long>(test_size));
  DictionarySplit out;
  out.train = {dict.src_lang, dict.tgt_lang, {}, dict.provenance};
  out.test = {dict.src_lang, dict.tgt_lang, {}, dict.provenance};
  for (const auto &p : dict.pairs)
    (held.count(p.src) ? out.test : out.train).pairs.push_back(p);
  return out;
}

struct DictionaryLoadOptions {
  std::string src_lang;  // empty: guessed from the file name
  std::string tgt_lang;
  bool strict = false;   // malformed lines are fatal instead of skipped
  bool lowercase = false;
};

struct LineIssue {
  std::size_t line;
  std::string text;
};

/// Reads one pair per line. A line containing a tab is split on tabs, other
/// lines on single spaces; either way exactly two non-empty columns are
/// required. Blank lines are ignored.
inline DictionaryPairs load_dictionary(const std::filesystem::path &path,
                                       const DictionaryLoadOptions &options = {},
                                       std::vector<LineIssue> *issues = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dictionary " + path.string());
  DictionaryPairs dict;
  dict.src_lang = options.src_lang;
  dict.tgt_lang = options.tgt_lang;
  if (dict.src_lang.empty() || dict.tgt_lang.empty()) {
    if (auto guess = text::language_pair_from_path(path)) {
      if (dict.src_lang.empty()) dict.src_lang = guess->first;
      if (dict.tgt_lang.empty()) dict.tgt_lang = guess->second;
    }
  }
  std::string line;
  std::size_t line_no = 0;
  std::size_t bad = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    char sep = line.find('\t') != std::string::npos ? '\t' : ' ';
    auto cols = text::split(line, sep);
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
      if (options.strict)
        throw ParseError(ParseErrorCode::bad_columns, path.string(), line_no,
                         "expected two columns");
      ++bad;
      if (issues) issues->push_back({line_no, line});
      log::warn("dict-load", path.string() + ":" + std::to_string(line_no) +
                                 ": skipped line without two columns");
      continue;
    }
    if (options.lowercase) {
      dict.pairs.push_back({text::to_lower(cols[0]), text::to_lower(cols[1])});
    } else {
      dict.pairs.push_back({std::string(cols[0]), std::string(cols[1])});
    }
  }
  if (bad)
    log::info("dict-load", std::to_string(bad) + " malformed lines skipped in " +
                               path.string());
  return dict;
}

/// Writes `src<TAB>tgt` lines.
inline void save_dictionary(const DictionaryPairs &dict,
                            const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write dictionary " + path.string());
  for (const auto &p : dict.pairs) {
    if (p.src.find_first_of("\t\n") != std::string::npos ||
        p.tgt.find_first_of("\t\n") != std::string::npos)
      throw DataError("pair (" + p.src + ", " + p.tgt +
                      ") cannot be written as a two-column line");
    out << p.src << '\t' << p.tgt << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace xlalign
