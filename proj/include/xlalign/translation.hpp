// xlalign/translation.hpp

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

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "xlalign/dictionary.hpp"
#include "xlalign/error.hpp"
#include "xlalign/log.hpp"
#include "xlalign/parallel.hpp"
#include "xlalign/text.hpp"

namespace xlalign {

enum class TranslationStatus {
  ok,
  not_found,  // the service (or cache) has no translation for the word
  failed,     // transport or server failure after all retries
};

struct TranslationResult {
  TranslationStatus status = TranslationStatus::failed;
  std::string text;
  std::string detail;

  static TranslationResult success(std::string text) {
    return {TranslationStatus::ok, std::move(text), {}};
  }
  static TranslationResult missing(std::string detail = {}) {
    return {TranslationStatus::not_found, {}, std::move(detail)};
  }
  static TranslationResult failure(std::string detail) {
    return {TranslationStatus::failed, {}, std::move(detail)};
  }
};

/// Word-level translation service. Implementations must be safe to call from
/// several threads at once.
class TranslationClient {
 public:
  virtual ~TranslationClient() = default;
  virtual TranslationResult translate(std::string_view word, std::string_view from,
                                      std::string_view to) = 0;
};

/// In-memory client backed by fixed lookup tables; words listed with
/// `fail()` report a transport failure.
class StaticTranslationClient : public TranslationClient {
 public:
  StaticTranslationClient &add(std::string from, std::string to,
                               std::map<std::string, std::string> table) {
    tables_[{std::move(from), std::move(to)}] = std::move(table);
    return *this;
  }

  StaticTranslationClient &fail(std::string from, std::string to, std::string word) {
    failing_.insert({std::move(from), std::move(to), std::move(word)});
    return *this;
  }

  TranslationResult translate(std::string_view word, std::string_view from,
                              std::string_view to) override {
    if (failing_.count({std::string(from), std::string(to), std::string(word)}))
      return TranslationResult::failure("scripted failure");
    auto t = tables_.find({std::string(from), std::string(to)});
    if (t == tables_.end()) return TranslationResult::missing();
    auto w = t->second.find(std::string(word));
    if (w == t->second.end()) return TranslationResult::missing();
    return TranslationResult::success(w->second);
  }

 private:
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::string>>
      tables_;
  std::set<std::tuple<std::string, std::string, std::string>> failing_;
};

/// Response cache persisted as `word<TAB>from<TAB>to<TAB>translation` lines.
/// Later lines override earlier ones for the same key.
class TranslationCache {
 public:
  TranslationCache() = default;

  explicit TranslationCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto cols = text::split(line, '\t');
      if (cols.size() != 4)
        throw ParseError(ParseErrorCode::bad_columns, path_.string(), line_no,
                         "cache lines need four tab-separated columns");
      entries_[{std::string(cols[0]), std::string(cols[1]), std::string(cols[2])}] =
          std::string(cols[3]);
    }
  }

  std::optional<std::string> lookup(std::string_view word, std::string_view from,
                                    std::string_view to) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find({std::string(word), std::string(from), std::string(to)});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void store(std::string_view word, std::string_view from, std::string_view to,
             std::string_view translation) {
    for (auto field : {word, from, to, translation})
      if (field.find_first_of("\t\n") != std::string_view::npos)
        throw DataError("cannot cache a field containing tab or newline");
    std::lock_guard<std::mutex> lock(mu_);
    entries_[{std::string(word), std::string(from), std::string(to)}] =
        std::string(translation);
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw DataError("cannot append to cache " + path_.string());
    out << word << '\t' << from << '\t' << to << '\t' << translation << '\n';
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
  }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::tuple<std::string, std::string, std::string>, std::string> entries_;
};

/// Serves translations from a cache only; never touches the network.
class ReplayTranslationClient : public TranslationClient {
 public:
  explicit ReplayTranslationClient(std::shared_ptr<const TranslationCache> cache)
      : cache_(std::move(cache)) {}

  TranslationResult translate(std::string_view word, std::string_view from,
                              std::string_view to) override {
    if (auto hit = cache_->lookup(word, from, to)) {
      if (hit->empty()) return TranslationResult::missing("cached empty answer");
      return TranslationResult::success(*hit);
    }
    return TranslationResult::missing("not in replay cache");
  }

 private:
  std::shared_ptr<const TranslationCache> cache_;
};

/// Consults the cache first and records every answer the inner client gives.
/// Transport failures are not cached.
class CachingTranslationClient : public TranslationClient {
 public:
  CachingTranslationClient(std::shared_ptr<TranslationClient> inner,
                           std::shared_ptr<TranslationCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  TranslationResult translate(std::string_view word, std::string_view from,
                              std::string_view to) override {
    if (auto hit = cache_->lookup(word, from, to)) {
      if (hit->empty()) return TranslationResult::missing("cached empty answer");
      return TranslationResult::success(*hit);
    }
    TranslationResult r = inner_->translate(word, from, to);
    if (r.status == TranslationStatus::ok) cache_->store(word, from, to, r.text);
    if (r.status == TranslationStatus::not_found) cache_->store(word, from, to, "");
    return r;
  }

 private:
  std::shared_ptr<TranslationClient> inner_;
  std::shared_ptr<TranslationCache> cache_;
};

/// Spaces out acquisitions so that at most `rps` happen per second.
class RateLimiter {
 public:
  explicit RateLimiter(double rps) : rps_(rps) {}

  void acquire() {
    if (rps_ <= 0.0) return;
    using clock = std::chrono::steady_clock;
    auto interval = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(1.0 / rps_));
    clock::time_point slot;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto now = clock::now();
      slot = std::max(now, next_);
      next_ = slot + interval;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  double rps_;
  std::mutex mu_;
  std::chrono::steady_clock::time_point next_{};
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{250};
  double multiplier = 2.0;
};

struct HttpClientOptions {
  std::string endpoint;  // e.g. http://localhost:8080/translate
  std::string api_key;   // sent as a bearer token when non-empty
  double rps = 5.0;
  RetryPolicy retry;
  std::chrono::seconds timeout{10};
};

inline constexpr const char *kApiKeyEnv = "XLALIGN_TRANSLATE_API_KEY";

inline std::string api_key_from_env() {
  const char *key = std::getenv(kApiKeyEnv);
  return key ? std::string(key) : std::string();
}

/// JSON-over-HTTP translation client. See docs/translation_api.md for the
/// request and response bodies.
class HttpTranslationClient : public TranslationClient {
 public:
  explicit HttpTranslationClient(HttpClientOptions options)
      : options_(std::move(options)), limiter_(options_.rps) {
    const std::string &url = options_.endpoint;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
      throw UsageError("endpoint must look like http://host[:port]/path: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    base_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  }

  TranslationResult translate(std::string_view word, std::string_view from,
                              std::string_view to) override {
    nlohmann::json body = {
        {"q", word}, {"source", from}, {"target", to}, {"format", "text"}};
    std::string payload = body.dump();
    httplib::Headers headers;
    if (!options_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + options_.api_key);

    auto backoff = options_.retry.initial_backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= options_.retry.max_attempts; ++attempt) {
      if (attempt > 1) {
        std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds(static_cast<long long>(
            static_cast<double>(backoff.count()) * options_.retry.multiplier));
      }
      limiter_.acquire();
      httplib::Client client(base_);
      client.set_connection_timeout(options_.timeout);
      client.set_read_timeout(options_.timeout);
      auto res = client.Post(path_, headers, payload, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 404) return TranslationResult::missing("HTTP 404");
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200)
        return TranslationResult::failure("HTTP " + std::to_string(res->status));
      return parse_response(res->body);
    }
    return TranslationResult::failure(last_error);
  }

  static TranslationResult parse_response(const std::string &body) {
    auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded()) return TranslationResult::failure("response is not JSON");
    if (doc.contains("translation") && doc["translation"].is_string()) {
      std::string t = doc["translation"];
      return t.empty() ? TranslationResult::missing() : TranslationResult::success(t);
    }
    // Google-style envelope: {"data":{"translations":[{"translatedText":...}]}}
    if (doc.contains("data") && doc["data"].contains("translations") &&
        doc["data"]["translations"].is_array() &&
        !doc["data"]["translations"].empty()) {
      const auto &first = doc["data"]["translations"][0];
      if (first.contains("translatedText") && first["translatedText"].is_string()) {
        std::string t = first["translatedText"];
        return t.empty() ? TranslationResult::missing()
                         : TranslationResult::success(t);
      }
    }
    return TranslationResult::failure("response lacks a translation field");
  }

 private:
  HttpClientOptions options_;
  RateLimiter limiter_;
  std::string base_;
  std::string path_;
};

struct TranslationStats {
  std::size_t requested = 0;
  std::size_t translated = 0;
  std::size_t dropped_multi_token = 0;
  std::size_t untranslated = 0;  // not_found or empty answer
  std::size_t failed = 0;
  std::vector<std::string> failed_words;
};

struct TranslationRun {
  DictionaryPairs dict;
  TranslationStats stats;
};

struct TranslateOptions {
  std::size_t concurrency = 1;
};

/// Translates every word; keeps single-token answers in input order.
inline TranslationRun translate_wordlist(TranslationClient &client,
                                         const std::vector<std::string> &words,
                                         const std::string &src, const std::string &tgt,
                                         const TranslateOptions &options = {}) {
  if (words.empty()) throw UsageError("word list is empty");
  for (const auto &w : words)
    if (!text::is_single_token(w))
      throw DataError("word list entry '" + w + "' is not a single token");

  std::vector<TranslationResult> results(words.size());
  parallel_for(words.size(), options.concurrency, [&](std::size_t i) {
    results[i] = client.translate(words[i], src, tgt);
  });

  TranslationRun run;
  run.dict = {src, tgt, {}, "round-trip"};
  run.stats.requested = words.size();
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto &r = results[i];
    if (r.status == TranslationStatus::failed) {
      ++run.stats.failed;
      run.stats.failed_words.push_back(words[i]);
      continue;
    }
    std::string_view t = text::trim(r.text);
    if (r.status == TranslationStatus::not_found || t.empty()) {
      ++run.stats.untranslated;
    } else if (!text::is_single_token(t)) {
      ++run.stats.dropped_multi_token;
    } else {
      ++run.stats.translated;
      run.dict.pairs.push_back({words[i], std::string(t)});
    }
  }
  log::info("dict-build",
            "translated " + std::to_string(run.stats.translated) + "/" +
                std::to_string(run.stats.requested) + " words " + src + "->" + tgt +
                ", multi-token " + std::to_string(run.stats.dropped_multi_token) +
                ", untranslated " + std::to_string(run.stats.untranslated) +
                ", failed " + std::to_string(run.stats.failed));
  return run;
}

struct ReverseFilterOptions {
  bool fold_case = false;
  std::size_t concurrency = 1;
};

struct ReverseFilterRun {
  DictionaryPairs dict;
  std::size_t kept = 0;
  std::size_t mismatched = 0;
  std::size_t failed = 0;  // back-translation failed or returned nothing
};

/// Keeps the pairs (s, t) whose target translates back to exactly s.
inline ReverseFilterRun reverse_filter(TranslationClient &client,
                                       const DictionaryPairs &dict,
                                       const ReverseFilterOptions &options = {}) {
  std::vector<TranslationResult> results(dict.size());
  parallel_for(dict.size(), options.concurrency, [&](std::size_t i) {
    results[i] = client.translate(dict.pairs[i].tgt, dict.tgt_lang, dict.src_lang);
  });
  auto canon = [&](std::string_view s) {
    return options.fold_case ? text::to_lower(s) : std::string(s);
  };
  ReverseFilterRun run;
  run.dict = {dict.src_lang, dict.tgt_lang, {}, dict.provenance};
  for (std::size_t i = 0; i < dict.size(); ++i) {
    const auto &r = results[i];
    if (r.status != TranslationStatus::ok) {
      ++run.failed;
      continue;
    }
    if (canon(text::trim(r.text)) == canon(dict.pairs[i].src)) {
      ++run.kept;
      run.dict.pairs.push_back(dict.pairs[i]);
    } else {
      ++run.mismatched;
    }
  }
  log::info("dict-build", "reverse filter kept " + std::to_string(run.kept) + " of " +
                              std::to_string(dict.size()) + " pairs (" +
                              std::to_string(run.mismatched) + " mismatched, " +
                              std::to_string(run.failed) + " failed)");
  return run;
}

}  // namespace xlalign
