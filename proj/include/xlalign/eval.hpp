// xlalign/eval.hpp

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
#include <cstdio>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xlalign/align.hpp"
#include "xlalign/dictionary.hpp"
#include "xlalign/embio.hpp"
#include "xlalign/error.hpp"
#include "xlalign/log.hpp"
#include "xlalign/parallel.hpp"

namespace xlalign {

struct Candidate {
  std::size_t index;
  std::string word;
  double score;

  friend bool operator==(const Candidate &, const Candidate &) = default;
};

namespace detail {

// Sequential accumulation; every retrieval path scores through this so that
// scores are bitwise identical across paths.
inline double dot(const double *a, const double *b, Eigen::Index n) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

struct Scored {
  double score;
  std::size_t index;
};

// Higher score first, lower vocabulary index on ties.
inline bool ranks_before(const Scored &a, const Scored &b) {
  return a.score > b.score || (a.score == b.score && a.index < b.index);
}

}  // namespace detail

/// Cosine nearest-neighbour search over a target vocabulary. Rows are unit
/// normalized once at construction so that cosine is a plain dot product.
class RetrievalIndex {
 public:
  explicit RetrievalIndex(VocabEmbedding target)
      : target_(std::move(target)), unit_(target_.matrix()) {
    for (Eigen::Index r = 0; r < unit_.rows(); ++r) {
      double n = unit_.row(r).norm();
      if (n > 0) unit_.row(r) /= n;
    }
  }

  std::size_t size() const { return target_.size(); }
  Eigen::Index dim() const { return unit_.cols(); }
  const VocabEmbedding &target() const { return target_; }

  Vector unit_query(const Eigen::Ref<const Vector> &query) const {
    if (query.size() != dim())
      throw DataError("query dimension " + std::to_string(query.size()) +
                      " does not match target dimension " + std::to_string(dim()));
    double n = query.norm();
    if (!(n > 0)) throw DataError("query vector is zero");
    return query / n;
  }

  /// Reference path: score everything, sort, cut.
  std::vector<Candidate> brute_force(const Eigen::Ref<const Vector> &query,
                                     std::size_t k) const {
    check_k(k);
    Vector q = unit_query(query);
    std::vector<detail::Scored> all(size());
    for (std::size_t i = 0; i < size(); ++i)
      all[i] = {detail::dot(q.data(), unit_.row(static_cast<Eigen::Index>(i)).data(), dim()),
                i};
    std::sort(all.begin(), all.end(), detail::ranks_before);
    all.resize(k);
    return to_candidates(all);
  }

  /// Batched path: queries and targets are processed in cache-sized blocks
  /// and a bounded heap keeps the running top k per query. Query blocks run
  /// on up to `workers` threads.
  std::vector<std::vector<Candidate>> search(const Matrix &queries, std::size_t k,
                                             std::size_t workers = 1) const {
    check_k(k);
    const auto nq = static_cast<std::size_t>(queries.rows());
    Matrix q(queries.rows(), queries.cols());
    for (Eigen::Index r = 0; r < queries.rows(); ++r)
      q.row(r) = unit_query(queries.row(r).transpose()).transpose();

    constexpr std::size_t kQueryBlock = 32;
    constexpr std::size_t kTargetBlock = 512;
    std::vector<std::vector<detail::Scored>> heaps(nq);
    const std::size_t blocks = (nq + kQueryBlock - 1) / kQueryBlock;
    parallel_for(blocks, workers, [&](std::size_t b) {
      const std::size_t q0 = b * kQueryBlock, q1 = std::min(nq, q0 + kQueryBlock);
      for (std::size_t i = q0; i < q1; ++i) heaps[i].reserve(k + 1);
      for (std::size_t t0 = 0; t0 < size(); t0 += kTargetBlock) {
        const std::size_t t1 = std::min(size(), t0 + kTargetBlock);
        for (std::size_t i = q0; i < q1; ++i) {
          const double *qi = q.row(static_cast<Eigen::Index>(i)).data();
          auto &heap = heaps[i];
          for (std::size_t t = t0; t < t1; ++t) {
            detail::Scored s{
                detail::dot(qi, unit_.row(static_cast<Eigen::Index>(t)).data(), dim()), t};
            if (heap.size() < k) {
              heap.push_back(s);
              std::push_heap(heap.begin(), heap.end(), detail::ranks_before);
            } else if (detail::ranks_before(s, heap.front())) {
              std::pop_heap(heap.begin(), heap.end(), detail::ranks_before);
              heap.back() = s;
              std::push_heap(heap.begin(), heap.end(), detail::ranks_before);
            }
          }
        }
      }
      for (std::size_t i = q0; i < q1; ++i)
        std::sort_heap(heaps[i].begin(), heaps[i].end(), detail::ranks_before);
    });
    std::vector<std::vector<Candidate>> out(nq);
    for (std::size_t i = 0; i < nq; ++i) out[i] = to_candidates(heaps[i]);
    return out;
  }

 private:
  void check_k(std::size_t k) const {
    if (k == 0 || k > size())
      throw UsageError("k must lie in [1, " + std::to_string(size()) + "], got " +
                       std::to_string(k));
  }

  std::vector<Candidate> to_candidates(const std::vector<detail::Scored> &scored) const {
    std::vector<Candidate> out;
    out.reserve(scored.size());
    for (const auto &s : scored) out.push_back({s.index, target_.words()[s.index], s.score});
    return out;
  }

  VocabEmbedding target_;
  Matrix unit_;
};

/// The k target words closest in cosine to `query`, best first.
inline std::vector<Candidate> induce(const Eigen::Ref<const Vector> &query,
                                     const AlignedSpace &target, std::size_t k) {
  RetrievalIndex index(target.embedding);
  return index.search(query.transpose(), k).front();
}

enum class OovPolicy { skip, fail };

inline OovPolicy parse_oov_policy(std::string_view s) {
  if (s == "skip") return OovPolicy::skip;
  if (s == "fail") return OovPolicy::fail;
  throw UsageError("oov policy must be skip or fail, got '" + std::string(s) + "'");
}

inline const char *to_string(OovPolicy p) { return p == OovPolicy::skip ? "skip" : "fail"; }

struct EvalReport {
  std::string src_lang;
  std::string tgt_lang;
  std::vector<int> k_values;
  std::vector<double> precision;  // aligned with k_values
  std::size_t evaluated = 0;
  std::size_t skipped_oov_src = 0;
  std::size_t gold_oov_tgt = 0;
  std::string method_label;

  double at(int k) const {
    for (std::size_t i = 0; i < k_values.size(); ++i)
      if (k_values[i] == k) return precision[i];
    throw DataError("report has no P@" + std::to_string(k));
  }

  friend bool operator==(const EvalReport &, const EvalReport &) = default;
};

struct EvalOptions {
  OovPolicy oov_policy = OovPolicy::skip;
  std::string method_label;
  std::size_t workers = 1;
};

/// Bilingual dictionary induction. Each distinct test source word is one
/// unit; it scores a hit at k when any in-vocabulary gold translation is
/// among its top k neighbours. k larger than the target vocabulary is
/// clamped to it.
inline EvalReport precision_at_k(const AlignedSpace &src, const AlignedSpace &tgt,
                                 const DictionaryPairs &test, std::vector<int> ks,
                                 const EvalOptions &options = {}) {
  if (test.empty()) throw DataError("test dictionary is empty");
  if (ks.empty()) throw UsageError("no k values given");
  for (int k : ks)
    if (k <= 0) throw UsageError("k values must be positive");
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  DictionaryPairs t = test;
  if (!test.src_lang.empty() && !test.tgt_lang.empty() && !src.language.empty() &&
      !tgt.language.empty())
    t = oriented(test, src.language, tgt.language);

  // Distinct source words in order, with their gold translations.
  std::vector<std::string> words;
  std::unordered_map<std::string, std::vector<std::string>> gold;
  std::unordered_set<WordPair, WordPairHash> seen_pairs;
  EvalReport report{src.language, tgt.language, ks, {}, 0, 0, 0, options.method_label};
  for (const auto &p : t.pairs) {
    if (!seen_pairs.insert(p).second) continue;
    auto [it, fresh] = gold.try_emplace(p.src);
    if (fresh) words.push_back(p.src);
    it->second.push_back(p.tgt);
    if (!tgt.embedding.contains(p.tgt)) ++report.gold_oov_tgt;
  }

  std::vector<std::size_t> query_rows;
  std::vector<const std::vector<std::string> *> query_gold;
  std::size_t oov_misses = 0;
  for (const auto &w : words) {
    auto row = src.embedding.index_of(w);
    if (!row) {
      if (options.oov_policy == OovPolicy::skip) {
        ++report.skipped_oov_src;
      } else {
        ++oov_misses;
      }
      continue;
    }
    query_rows.push_back(*row);
    query_gold.push_back(&gold.at(w));
  }
  report.evaluated = query_rows.size() + oov_misses;
  if (report.evaluated == 0)
    throw DataError("no test source word is in the source vocabulary");

  std::vector<std::size_t> hits(ks.size(), 0);
  if (!query_rows.empty()) {
    RetrievalIndex index(tgt.embedding);
    const std::size_t kmax = std::min<std::size_t>(ks.back(), index.size());
    Matrix queries(static_cast<Eigen::Index>(query_rows.size()), src.embedding.dim());
    for (std::size_t i = 0; i < query_rows.size(); ++i)
      queries.row(static_cast<Eigen::Index>(i)) = src.embedding.row(query_rows[i]);
    auto ranked = index.search(queries, kmax, options.workers);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      // Rank of the best in-vocabulary gold translation, if retrieved.
      std::size_t best = ranked[i].size();
      for (const auto &g : *query_gold[i]) {
        for (std::size_t r = 0; r < ranked[i].size() && r < best; ++r)
          if (ranked[i][r].word == g) best = r;
      }
      for (std::size_t j = 0; j < ks.size(); ++j)
        if (best < static_cast<std::size_t>(ks[j])) ++hits[j];
    }
  }
  for (std::size_t j = 0; j < ks.size(); ++j)
    report.precision.push_back(static_cast<double>(hits[j]) /
                               static_cast<double>(report.evaluated));
  log::info("eval", report.src_lang + "->" + report.tgt_lang + " evaluated " +
                        std::to_string(report.evaluated) + ", skipped " +
                        std::to_string(report.skipped_oov_src) + " OOV sources, " +
                        std::to_string(report.gold_oov_tgt) + " OOV gold targets");
  return report;
}

// JSON report schema: see docs/report_schema.md.
inline nlohmann::ordered_json to_json(const EvalReport &r) {
  nlohmann::ordered_json j;
  j["method"] = r.method_label;
  j["src_lang"] = r.src_lang;
  j["tgt_lang"] = r.tgt_lang;
  j["k"] = r.k_values;
  j["precision"] = r.precision;
  j["evaluated"] = r.evaluated;
  j["skipped_oov_src"] = r.skipped_oov_src;
  j["gold_oov_tgt"] = r.gold_oov_tgt;
  return j;
}

inline EvalReport report_from_json(const nlohmann::json &j) {
  EvalReport r;
  r.method_label = j.at("method").get<std::string>();
  r.src_lang = j.at("src_lang").get<std::string>();
  r.tgt_lang = j.at("tgt_lang").get<std::string>();
  r.k_values = j.at("k").get<std::vector<int>>();
  r.precision = j.at("precision").get<std::vector<double>>();
  r.evaluated = j.at("evaluated").get<std::size_t>();
  r.skipped_oov_src = j.at("skipped_oov_src").get<std::size_t>();
  r.gold_oov_tgt = j.at("gold_oov_tgt").get<std::size_t>();
  if (r.k_values.size() != r.precision.size())
    throw DataError("report has mismatched k and precision arrays");
  return r;
}

inline std::vector<EvalReport> parse_reports(const std::string &json_text) {
  auto doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.contains("reports"))
    throw DataError("not an evaluation report document");
  std::vector<EvalReport> out;
  for (const auto &j : doc.at("reports")) out.push_back(report_from_json(j));
  return out;
}

enum class ReportFormat { json, tsv, table };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::json;
  if (s == "tsv") return ReportFormat::tsv;
  if (s == "table") return ReportFormat::table;
  throw UsageError("report format must be json, tsv or table");
}

inline std::string format_percent(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * p);
  return buf;
}

/// Deterministic rendering. `table` lays reports out like the usual BDI
/// tables: one row per method, one column per (language, k).
inline std::string render_report(const std::vector<EvalReport> &reports,
                                 ReportFormat format) {
  if (format == ReportFormat::json) {
    nlohmann::ordered_json doc;
    doc["schema"] = "xlalign.eval.v1";
    doc["reports"] = nlohmann::ordered_json::array();
    for (const auto &r : reports) doc["reports"].push_back(to_json(r));
    return doc.dump(2) + "\n";
  }
  if (format == ReportFormat::tsv) {
    std::string out =
        "method\tsrc_lang\ttgt_lang\tk\tprecision\tevaluated\tskipped_oov_src\tgold_oov_tgt\n";
    for (const auto &r : reports)
      for (std::size_t i = 0; i < r.k_values.size(); ++i)
        out += r.method_label + '\t' + r.src_lang + '\t' + r.tgt_lang + '\t' +
               std::to_string(r.k_values[i]) + '\t' + text::format_double(r.precision[i]) +
               '\t' + std::to_string(r.evaluated) + '\t' +
               std::to_string(r.skipped_oov_src) + '\t' +
               std::to_string(r.gold_oov_tgt) + '\n';
    return out;
  }

  // Columns: (language pair, k) in order of first appearance.
  std::vector<std::pair<std::string, std::string>> pairs;
  std::map<std::pair<std::string, std::string>, std::vector<int>> pair_ks;
  std::vector<std::string> methods;
  bool one_source = true;
  for (const auto &r : reports) {
    auto key = std::make_pair(r.src_lang, r.tgt_lang);
    if (!pair_ks.count(key)) pairs.push_back(key);
    auto &ks = pair_ks[key];
    for (int k : r.k_values)
      if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
    if (std::find(methods.begin(), methods.end(), r.method_label) == methods.end())
      methods.push_back(r.method_label);
    one_source = one_source && r.src_lang == reports.front().src_lang;
  }
  std::string out = "Method";
  for (const auto &key : pairs) {
    std::string lang = one_source ? key.second : key.first + "-" + key.second;
    for (int k : pair_ks[key]) out += "  " + lang + "@" + std::to_string(k);
  }
  out += '\n';
  for (const auto &method : methods) {
    std::string row = method;
    for (const auto &key : pairs) {
      const EvalReport *hit = nullptr;
      for (const auto &r : reports)
        if (r.method_label == method && r.src_lang == key.first && r.tgt_lang == key.second) {
          hit = &r;
          break;
        }
      for (int k : pair_ks[key]) {
        auto pos = hit ? std::find(hit->k_values.begin(), hit->k_values.end(), k)
                       : std::vector<int>::const_iterator{};
        if (!hit || pos == hit->k_values.end()) {
          row += "  x";
        } else {
          row += "  " + format_percent(hit->precision[pos - hit->k_values.begin()]);
        }
      }
    }
    out += row + '\n';
  }
  return out;
}

}  // namespace xlalign
