// tests/fixtures.hpp

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

// Seeded synthetic data shared by the unit suites and the acceptance binary.

#pragma once

#include <array>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "xlalign/xlalign.hpp"

namespace fixture {

using xlalign::Matrix;

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng,
                       double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = n(rng);
  return m;
}

inline oracle::Dense to_dense(const Matrix &m) {
  oracle::Dense d(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) d(r, c) = m(r, c);
  return d;
}

inline Matrix from_dense(const oracle::Dense &d) {
  Matrix m(static_cast<Eigen::Index>(d.rows), static_cast<Eigen::Index>(d.cols));
  for (std::size_t r = 0; r < d.rows; ++r)
    for (std::size_t c = 0; c < d.cols; ++c) m(r, c) = d(r, c);
  return m;
}

/// Orthogonal matrix: Q factor of a seeded Gaussian matrix (oracle QR).
inline Matrix random_rotation(Eigen::Index d, std::mt19937_64 &rng) {
  return from_dense(oracle::gram_schmidt_q(to_dense(gaussian(d, d, rng))));
}

inline Matrix unit_rows(Matrix m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) m.row(r).normalize();
  return m;
}

inline std::vector<std::string> words(const std::string &prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

inline xlalign::DictionaryPairs pairs_by_index(const std::string &src_lang,
                                               const std::string &tgt_lang,
                                               const std::vector<std::string> &src,
                                               const std::vector<std::string> &tgt) {
  xlalign::DictionaryPairs d{src_lang, tgt_lang, {}, "file"};
  for (std::size_t i = 0; i < src.size(); ++i) d.pairs.push_back({src[i], tgt[i]});
  return d;
}

/// Rotation-recovery instance: `en` holds unit rows X, `tr` holds X R (plus
/// optional noise). Words are en0.. and tr0.. paired by index.
struct RotationFixture {
  Matrix rotation;
  xlalign::VocabEmbedding en;
  xlalign::VocabEmbedding tr;
  xlalign::DictionaryPairs dict;  // en -> tr, every word
};

inline RotationFixture rotation_fixture(std::size_t n, Eigen::Index d, std::uint64_t seed,
                                        double noise = 0.0) {
  std::mt19937_64 rng(seed);
  Matrix x = unit_rows(gaussian(static_cast<Eigen::Index>(n), d, rng));
  Matrix r = random_rotation(d, rng);
  Matrix z = x * r;
  if (noise > 0) z += gaussian(z.rows(), z.cols(), rng, noise);
  auto en_words = words("en", n), tr_words = words("tr", n);
  return {r, xlalign::VocabEmbedding("en", en_words, x),
          xlalign::VocabEmbedding("tr", tr_words, z),
          pairs_by_index("en", "tr", en_words, tr_words)};
}

/// Per-test scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string &tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("xlalign-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path &p, const std::string &content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

/// Writes the rotation fixture as en.vec / tr.vec / train and test
/// dictionaries plus a pipeline config into `dir`; returns the config path.
inline std::filesystem::path write_rotation_run(const std::filesystem::path &dir,
                                                std::uint64_t seed = 7) {
  auto fx = rotation_fixture(50, 10, seed);
  xlalign::save_embeddings(fx.en, dir / "en.vec");
  xlalign::save_embeddings(fx.tr, dir / "tr.vec");
  xlalign::save_dictionary(fx.dict, dir / "en-tr.train.tsv");
  xlalign::save_dictionary(fx.dict, dir / "en-tr.test.tsv");
  write_file(dir / "config.json", R"({
  "method": "orthogonal",
  "normalize": "unit,center,unit",
  "reference": {"path": "en.vec", "lang": "en"},
  "other": {"path": "tr.vec", "lang": "tr"},
  "dictionary": {"train": "en-tr.train.tsv", "test": "en-tr.test.tsv"},
  "oov_policy": "skip",
  "ks": [1, 5, 10],
  "seed": 11,
  "output_dir": "out",
  "method_label": "VecMap"
}
)");
  return dir / "config.json";
}

/// Replay-cache fixture for the dictionary pipeline: a 30-entry English word
/// list (three entries repeated) where 13 entries survive the round trip.
/// Of the rest, 6 come back as a different word, 3 translate to several
/// tokens, 2 have no reverse entry and 6 are unknown to the cache.
struct DictPipelineFixture {
  std::vector<std::string> wordlist;
  std::filesystem::path cache;
  std::filesystem::path wordlist_file;
};

inline DictPipelineFixture write_dict_pipeline(const std::filesystem::path &dir) {
  const std::vector<std::pair<std::string, std::string>> round_trip = {
      {"good", "iyi"},   {"water", "su"},   {"house", "ev"},    {"book", "kitap"},
      {"cat", "kedi"},   {"dog", "köpek"},  {"bread", "ekmek"}, {"sea", "deniz"},
      {"tree", "ağaç"}, {"road", "yol"}};
  const std::vector<std::array<std::string, 3>> mismatched = {
      {"bank", "kıyı", "shore"},     {"right", "sağ", "healthy"},
      {"fair", "adil", "just"},      {"light", "hafif", "lightweight"},
      {"date", "hurma", "palm"},     {"bat", "yarasa", "wound"}};
  const std::vector<std::pair<std::string, std::string>> multi_token = {
      {"sunset", "gün batımı"}, {"homework", "ev ödevi"}, {"railway", "demir yolu"}};
  const std::vector<std::pair<std::string, std::string>> one_way = {
      {"lantern", "fener"}, {"anchor", "çapa"}};
  const std::vector<std::string> unknown = {"xylograph", "quixotic", "zeugma",
                                            "syzygy",    "apophenia", "petrichor"};

  std::string cache;
  auto entry = [&](const std::string &w, const std::string &from, const std::string &to,
                   const std::string &t) { cache += w + '\t' + from + '\t' + to + '\t' + t + '\n'; };
  DictPipelineFixture fx;
  for (const auto &[en, tr] : round_trip) {
    entry(en, "en", "tr", tr);
    entry(tr, "tr", "en", en);
    fx.wordlist.push_back(en);
  }
  for (const auto &[en, tr, back] : mismatched) {
    entry(en, "en", "tr", tr);
    entry(tr, "tr", "en", back);
    fx.wordlist.push_back(en);
  }
  for (const auto &[en, tr] : multi_token) {
    entry(en, "en", "tr", tr);
    fx.wordlist.push_back(en);
  }
  for (const auto &[en, tr] : one_way) {
    entry(en, "en", "tr", tr);
    fx.wordlist.push_back(en);
  }
  for (const auto &w : unknown) fx.wordlist.push_back(w);
  for (const auto &w : {"good", "water", "house"}) fx.wordlist.push_back(w);

  fx.cache = dir / "cache.tsv";
  fx.wordlist_file = dir / "words.txt";
  write_file(fx.cache, cache);
  std::string words;
  for (const auto &w : fx.wordlist) words += w + '\n';
  write_file(fx.wordlist_file, words);
  return fx;
}

}  // namespace fixture
