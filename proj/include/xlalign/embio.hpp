// xlalign/embio.hpp

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

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xlalign/error.hpp"
#include "xlalign/log.hpp"
#include "xlalign/text.hpp"

namespace xlalign {

// Row-per-word storage; all arithmetic is double precision regardless of the
// precision written on disk.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class NormStep { unit, center };
using NormRecipe = std::vector<NormStep>;

inline const char *to_string(NormStep step) {
  return step == NormStep::unit ? "unit" : "center";
}

inline std::string format_recipe(const NormRecipe &recipe) {
  std::string out;
  for (std::size_t i = 0; i < recipe.size(); ++i) {
    if (i) out += ',';
    out += to_string(recipe[i]);
  }
  return out;
}

// Parses "unit,center,unit". The literal "none" or an empty string gives an
// empty recipe.
inline NormRecipe parse_recipe(std::string_view spec) {
  NormRecipe recipe;
  if (text::trim(spec).empty() || text::trim(spec) == "none") return recipe;
  for (const auto &step : text::split_list(spec)) {
    if (step == "unit") {
      recipe.push_back(NormStep::unit);
    } else if (step == "center") {
      recipe.push_back(NormStep::center);
    } else {
      throw UsageError("unknown normalization step '" + step +
                       "' (expected unit or center)");
    }
  }
  return recipe;
}

inline NormRecipe default_recipe() {
  return {NormStep::unit, NormStep::center, NormStep::unit};
}

namespace detail {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

using WordIndex =
    std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>>;

}  // namespace detail

/// An ordered vocabulary with one dense row per word.
///
/// Instances are immutable; transformations return new values that share the
/// vocabulary with their source, so copies are cheap and thread-safe to share.
class VocabEmbedding {
 public:
  VocabEmbedding() : VocabEmbedding("", {}, Matrix(0, 1)) {}

  VocabEmbedding(std::string language, std::vector<std::string> words,
                 Matrix matrix, NormRecipe recipe = {})
      : language_(std::move(language)),
        matrix_(std::make_shared<const Matrix>(std::move(matrix))),
        recipe_(std::move(recipe)) {
    if (static_cast<std::size_t>(matrix_->rows()) != words.size())
      throw DataError("embedding has " + std::to_string(words.size()) +
                      " words but " + std::to_string(matrix_->rows()) + " rows");
    if (matrix_->cols() <= 0)
      throw DataError("embedding dimension must be positive");
    auto index = std::make_shared<detail::WordIndex>();
    index->reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (!text::is_single_token(words[i]))
        throw DataError("invalid word '" + words[i] + "' at row " +
                        std::to_string(i));
      if (!index->emplace(words[i], i).second)
        throw DataError("duplicate word '" + words[i] + "'");
    }
    words_ = std::make_shared<const std::vector<std::string>>(std::move(words));
    index_ = std::move(index);
    check_values();
  }

  const std::string &language() const noexcept { return language_; }
  const std::vector<std::string> &words() const noexcept { return *words_; }
  const Matrix &matrix() const noexcept { return *matrix_; }
  const NormRecipe &norm_recipe() const noexcept { return recipe_; }
  std::size_t size() const noexcept { return words_->size(); }
  Eigen::Index dim() const noexcept { return matrix_->cols(); }
  bool empty() const noexcept { return words_->empty(); }

  std::optional<std::size_t> index_of(std::string_view word) const {
    auto it = index_->find(word);
    if (it == index_->end()) return std::nullopt;
    return it->second;
  }
  bool contains(std::string_view word) const { return index_->count(word) > 0; }

  auto row(std::size_t i) const { return matrix_->row(static_cast<Eigen::Index>(i)); }

  // Same vocabulary and language, new vectors.
  VocabEmbedding with_matrix(Matrix matrix, NormRecipe recipe) const {
    VocabEmbedding out(*this);
    if (static_cast<std::size_t>(matrix.rows()) != size())
      throw DataError("replacement matrix has the wrong row count");
    if (matrix.cols() <= 0) throw DataError("embedding dimension must be positive");
    out.matrix_ = std::make_shared<const Matrix>(std::move(matrix));
    out.recipe_ = std::move(recipe);
    out.check_values();
    return out;
  }

  VocabEmbedding with_language(std::string language) const {
    VocabEmbedding out(*this);
    out.language_ = std::move(language);
    return out;
  }

 private:
  void check_values() const {
    if (!matrix_->allFinite()) throw DataError("embedding has non-finite values");
    if (recipe_.empty() || recipe_.back() != NormStep::unit) return;
    for (Eigen::Index r = 0; r < matrix_->rows(); ++r) {
      if (std::abs(matrix_->row(r).norm() - 1.0) > 1e-6)
        throw DataError("row '" + (*words_)[r] +
                        "' is not unit length after a unit step");
    }
  }

  std::string language_;
  std::shared_ptr<const std::vector<std::string>> words_;
  std::shared_ptr<const detail::WordIndex> index_;
  std::shared_ptr<const Matrix> matrix_;
  NormRecipe recipe_;
};

struct LoadOptions {
  std::optional<std::size_t> max_words;
  bool lowercase = false;
  std::string language;  // empty: guessed from the file name
};

/// Reads the text vector format: a `<count> <dim>` header, then one
/// `<word> <v1> ... <v_dim>` row per line. Trailing spaces and CR are
/// tolerated. With `lowercase`, later case variants of a word are dropped.
inline VocabEmbedding load_embeddings(const std::filesystem::path &path,
                                      const LoadOptions &options = {}) {
  const std::string file = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file " + file);

  auto strip = [](std::string &line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
  };

  std::string line;
  if (!std::getline(in, line))
    throw ParseError(ParseErrorCode::malformed_header, file, 1, "missing header");
  strip(line);
  auto header = text::split(line, ' ');
  std::optional<long long> count, dim;
  if (header.size() == 2) {
    count = text::parse_int<long long>(header[0]);
    dim = text::parse_int<long long>(header[1]);
  }
  if (!count || !dim || *count < 0 || *dim <= 0)
    throw ParseError(ParseErrorCode::malformed_header, file, 1,
                     "expected '<count> <dim>', got '" + line + "'");

  std::size_t limit = static_cast<std::size_t>(*count);
  if (options.max_words) limit = std::min(limit, *options.max_words);

  std::vector<std::string> words;
  std::vector<double> values;
  words.reserve(limit);
  values.reserve(limit * static_cast<std::size_t>(*dim));
  detail::WordIndex seen;
  std::size_t duplicates = 0;
  std::size_t line_no = 1;
  std::size_t rows_read = 0;
  while (words.size() < limit && rows_read < static_cast<std::size_t>(*count) &&
         std::getline(in, line)) {
    ++line_no;
    ++rows_read;
    strip(line);
    auto fields = text::split(line, ' ');
    if (fields.size() != static_cast<std::size_t>(*dim) + 1)
      throw ParseError(ParseErrorCode::wrong_arity, file, line_no,
                       "expected " + std::to_string(*dim + 1) + " fields, got " +
                           std::to_string(fields.size()));
    std::string word = options.lowercase ? text::to_lower(fields[0])
                                         : std::string(fields[0]);
    if (!text::is_single_token(word))
      throw ParseError(ParseErrorCode::invalid_word, file, line_no,
                       "word is empty or contains whitespace");
    std::size_t base = values.size();
    for (std::size_t k = 1; k < fields.size(); ++k) {
      auto v = text::parse_double(fields[k]);
      if (!v || !std::isfinite(*v))
        throw ParseError(ParseErrorCode::non_finite, file, line_no,
                         "field " + std::to_string(k) + " = '" +
                             std::string(fields[k]) + "'");
      values.push_back(*v);
    }
    if (!seen.emplace(word, words.size()).second) {
      ++duplicates;
      values.resize(base);
      continue;
    }
    words.push_back(std::move(word));
  }
  if (words.size() < limit && rows_read < static_cast<std::size_t>(*count))
    throw ParseError(ParseErrorCode::truncated, file, line_no + 1,
                     "header promises " + std::to_string(*count) + " rows");
  if (words.empty())
    throw ParseError(ParseErrorCode::empty_vocabulary, file, line_no,
                     "no vectors read");
  if (duplicates)
    log::info("load", "dropped " + std::to_string(duplicates) +
                          " duplicate words from " + file + " (first kept)");

  Matrix m(static_cast<Eigen::Index>(words.size()), *dim);
  std::copy(values.begin(), values.end(), m.data());
  std::string language =
      options.language.empty() ? text::language_from_path(path) : options.language;
  return VocabEmbedding(std::move(language), std::move(words), std::move(m));
}

/// Writes the text vector format with shortest round-trip decimal values.
inline void save_embeddings(const VocabEmbedding &emb,
                            const std::filesystem::path &path) {
  if (emb.empty())
    throw DataError("refusing to write an empty embedding to " + path.string());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write embedding file " + path.string());
  std::string buf;
  buf += std::to_string(emb.size()) + " " + std::to_string(emb.dim()) + "\n";
  const Matrix &m = emb.matrix();
  for (std::size_t i = 0; i < emb.size(); ++i) {
    buf += emb.words()[i];
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      buf += ' ';
      text::append_double(buf, m(static_cast<Eigen::Index>(i), c));
    }
    buf += '\n';
    if (buf.size() > (1u << 20)) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
  out.flush();
  if (!out) throw DataError("failed writing " + path.string());
}

/// Applies `steps` in order. `unit` scales rows to length one; `center`
/// subtracts the column mean taken over all rows.
inline VocabEmbedding normalize(const VocabEmbedding &emb, const NormRecipe &steps) {
  Matrix m = emb.matrix();
  for (NormStep step : steps) {
    if (step == NormStep::unit) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        double n = m.row(r).norm();
        if (n == 0.0)
          throw DataError("zero vector for word '" + emb.words()[r] +
                          "' at a unit normalization step");
        m.row(r) /= n;
      }
    } else {
      Eigen::RowVectorXd mean = m.colwise().mean();
      m.rowwise() -= mean;
    }
  }
  NormRecipe recipe = emb.norm_recipe();
  recipe.insert(recipe.end(), steps.begin(), steps.end());
  return emb.with_matrix(std::move(m), std::move(recipe));
}

// Applies `recipe` to an unnormalized embedding, or checks that an already
// normalized one used the same recipe.
inline VocabEmbedding ensure_normalized(const VocabEmbedding &emb,
                                        const NormRecipe &recipe) {
  if (emb.norm_recipe() == recipe) return emb;
  if (emb.norm_recipe().empty()) return normalize(emb, recipe);
  throw DataError("embedding '" + emb.language() + "' carries normalization [" +
                  format_recipe(emb.norm_recipe()) + "] but [" +
                  format_recipe(recipe) + "] was requested");
}

}  // namespace xlalign
