// xlalign/pipeline.hpp

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

#include <openssl/evp.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlalign/align.hpp"
#include "xlalign/dictionary.hpp"
#include "xlalign/embio.hpp"
#include "xlalign/error.hpp"
#include "xlalign/eval.hpp"
#include "xlalign/log.hpp"
#include "xlalign/mapping.hpp"
#include "xlalign/version.hpp"

namespace xlalign {

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw DataError("SHA-256 computation failed");
  static const char *hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

inline std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string sha256_file(const std::filesystem::path &path) {
  return sha256_hex(read_file(path));
}

enum class AlignMethod { orthogonal, multistep, meemi };

inline AlignMethod parse_align_method(std::string_view s) {
  if (s == "orthogonal") return AlignMethod::orthogonal;
  if (s == "multistep") return AlignMethod::multistep;
  if (s == "meemi") return AlignMethod::meemi;
  throw UsageError("method must be orthogonal, multistep or meemi, got '" +
                   std::string(s) + "'");
}

inline const char *to_string(AlignMethod m) {
  switch (m) {
    case AlignMethod::orthogonal: return "orthogonal";
    case AlignMethod::multistep: return "multistep";
    case AlignMethod::meemi: return "meemi";
  }
  return "orthogonal";
}

struct EmbeddingSource {
  std::filesystem::path path;
  std::string lang;
  std::optional<std::size_t> max_words;
  bool lowercase = false;
};

enum class PrepOrder { merge_then_clean, clean_then_merge };

struct DictPrep {
  std::filesystem::path source;
  std::vector<std::filesystem::path> merge_with;
  PrepOrder order = PrepOrder::merge_then_clean;
  std::size_t test_size = 500;
};

/// Declarative description of one align-and-evaluate run.
struct PipelineConfig {
  AlignMethod method = AlignMethod::orthogonal;
  NormRecipe recipe = default_recipe();
  double reweight_p = 0.5;
  std::optional<Eigen::Index> reduce_dim;
  EmbeddingSource reference;
  EmbeddingSource other;
  std::filesystem::path train_dict;
  std::filesystem::path test_dict;
  std::string dict_src_lang;
  std::string dict_tgt_lang;
  bool dict_lowercase = false;
  std::optional<DictPrep> prep;
  OovPolicy oov_policy = OovPolicy::skip;
  std::vector<int> ks{1, 5, 10};
  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir = "xlalign-out";
  std::string method_label;

  // Throws UsageError when the configuration cannot drive a run.
  void validate() const {
    if (reference.path.empty() || other.path.empty())
      throw UsageError("config needs reference.path and other.path");
    if (prep) {
      if (prep->source.empty()) throw UsageError("dict_prep.source is required");
      if (!seed) throw UsageError("a seed is required when dict_prep splits a dictionary");
    } else if (train_dict.empty() || test_dict.empty()) {
      throw UsageError("config needs dictionary.train and dictionary.test or dict_prep");
    }
    if (ks.empty()) throw UsageError("ks must not be empty");
  }

  std::string label() const {
    return method_label.empty() ? std::string(to_string(method)) : method_label;
  }
};

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path &base,
                                     const std::string &p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

inline EmbeddingSource parse_embedding_source(const nlohmann::json &j,
                                              const std::filesystem::path &base) {
  EmbeddingSource s;
  s.path = resolve(base, j.at("path").get<std::string>());
  s.lang = j.value("lang", std::string());
  if (j.contains("max_words") && !j["max_words"].is_null())
    s.max_words = j["max_words"].get<std::size_t>();
  s.lowercase = j.value("lowercase", false);
  return s;
}

inline nlohmann::ordered_json embedding_source_json(const EmbeddingSource &s) {
  nlohmann::ordered_json j;
  j["path"] = s.path.generic_string();
  j["lang"] = s.lang;
  j["max_words"] = s.max_words ? nlohmann::ordered_json(*s.max_words) : nullptr;
  j["lowercase"] = s.lowercase;
  return j;
}

}  // namespace detail

/// Reads a JSON config. Relative paths are taken relative to `base_dir`.
inline PipelineConfig parse_pipeline_config(const nlohmann::json &j,
                                            const std::filesystem::path &base_dir = {}) {
  try {
    PipelineConfig c;
    c.method = parse_align_method(j.value("method", std::string("orthogonal")));
    if (j.contains("normalize")) c.recipe = parse_recipe(j["normalize"].get<std::string>());
    c.reweight_p = j.value("reweight_p", 0.5);
    if (j.contains("reduce_dim") && !j["reduce_dim"].is_null())
      c.reduce_dim = j["reduce_dim"].get<Eigen::Index>();
    c.reference = detail::parse_embedding_source(j.at("reference"), base_dir);
    c.other = detail::parse_embedding_source(j.at("other"), base_dir);
    if (j.contains("dictionary")) {
      const auto &d = j["dictionary"];
      if (d.contains("train")) c.train_dict = detail::resolve(base_dir, d["train"]);
      if (d.contains("test")) c.test_dict = detail::resolve(base_dir, d["test"]);
      c.dict_src_lang = d.value("src_lang", std::string());
      c.dict_tgt_lang = d.value("tgt_lang", std::string());
      c.dict_lowercase = d.value("lowercase", false);
    }
    if (j.contains("dict_prep") && !j["dict_prep"].is_null()) {
      const auto &p = j["dict_prep"];
      DictPrep prep;
      prep.source = detail::resolve(base_dir, p.at("source").get<std::string>());
      for (const auto &m : p.value("merge_with", std::vector<std::string>{}))
        prep.merge_with.push_back(detail::resolve(base_dir, m));
      std::string order = p.value("order", std::string("merge-then-clean"));
      if (order == "merge-then-clean") {
        prep.order = PrepOrder::merge_then_clean;
      } else if (order == "clean-then-merge") {
        prep.order = PrepOrder::clean_then_merge;
      } else {
        throw UsageError("dict_prep.order must be merge-then-clean or clean-then-merge");
      }
      prep.test_size = p.value("test_size", std::size_t{500});
      c.prep = prep;
    }
    c.oov_policy = parse_oov_policy(j.value("oov_policy", std::string("skip")));
    if (j.contains("ks")) c.ks = j["ks"].get<std::vector<int>>();
    if (j.contains("seed") && !j["seed"].is_null()) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output_dir"))
      c.output_dir = detail::resolve(base_dir, j["output_dir"].get<std::string>());
    c.method_label = j.value("method_label", std::string());
    return c;
  } catch (const nlohmann::json::exception &e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path &path) {
  auto doc = nlohmann::json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw UsageError("config " + path.string() + " is not valid JSON");
  return parse_pipeline_config(doc, path.parent_path());
}

/// Canonical JSON form; its hash identifies the run in the manifest.
inline nlohmann::ordered_json to_json(const PipelineConfig &c) {
  nlohmann::ordered_json j;
  j["method"] = to_string(c.method);
  j["method_label"] = c.label();
  j["normalize"] = format_recipe(c.recipe);
  j["reweight_p"] = c.reweight_p;
  j["reduce_dim"] = c.reduce_dim ? nlohmann::ordered_json(*c.reduce_dim) : nullptr;
  j["reference"] = detail::embedding_source_json(c.reference);
  j["other"] = detail::embedding_source_json(c.other);
  j["dictionary"] = {{"train", c.train_dict.generic_string()},
                     {"test", c.test_dict.generic_string()},
                     {"src_lang", c.dict_src_lang},
                     {"tgt_lang", c.dict_tgt_lang},
                     {"lowercase", c.dict_lowercase}};
  if (c.prep) {
    nlohmann::ordered_json p;
    p["source"] = c.prep->source.generic_string();
    p["merge_with"] = nlohmann::ordered_json::array();
    for (const auto &m : c.prep->merge_with) p["merge_with"].push_back(m.generic_string());
    p["order"] = c.prep->order == PrepOrder::merge_then_clean ? "merge-then-clean"
                                                               : "clean-then-merge";
    p["test_size"] = c.prep->test_size;
    j["dict_prep"] = p;
  } else {
    j["dict_prep"] = nullptr;
  }
  j["oov_policy"] = to_string(c.oov_policy);
  j["ks"] = c.ks;
  j["seed"] = c.seed ? nlohmann::ordered_json(*c.seed) : nullptr;
  j["output_dir"] = c.output_dir.generic_string();
  return j;
}

struct PipelineResult {
  std::filesystem::path report_path;
  std::filesystem::path manifest_path;
  std::vector<EvalReport> reports;
};

/// Error raised by a pipeline stage; keeps the kind of the underlying error.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error &cause)
      : Error(cause.kind(), "[stage=" + stage + "] " + cause.what()),
        stage_(std::move(stage)) {}
  const std::string &stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

namespace detail {

class Manifest {
 public:
  Manifest(std::filesystem::path path, const PipelineConfig &config)
      : path_(std::move(path)) {
    doc_["tool"] = "xlalign";
    doc_["version"] = kVersion;
    auto cfg = to_json(config);
    doc_["config_hash"] = sha256_hex(cfg.dump());
    doc_["config"] = cfg;
    doc_["status"] = "running";
    doc_["failed_stage"] = nullptr;
    doc_["inputs"] = nlohmann::ordered_json::object();
    doc_["artifacts"] = nlohmann::ordered_json::object();
    write();
  }

  void input(const std::filesystem::path &p) {
    doc_["inputs"][p.generic_string()] = sha256_file(p);
  }
  void artifact(const std::filesystem::path &p) {
    doc_["artifacts"][p.filename().generic_string()] = sha256_file(p);
    write();
  }
  void finish() {
    doc_["status"] = "complete";
    write();
  }
  void fail(const std::string &stage) {
    doc_["status"] = "failed";
    doc_["failed_stage"] = stage;
    write();
  }

 private:
  void write() const {
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write manifest " + path_.string());
    out << doc_.dump(2) << '\n';
  }

  std::filesystem::path path_;
  nlohmann::ordered_json doc_;
};

inline void write_text(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace detail

/// Dictionary preparation, alignment, and evaluation. Artifacts land in
/// `config.output_dir`; manifest.json records hashes of inputs and outputs
/// and stays in status "running"/"failed" unless every stage succeeded.
inline PipelineResult run_pipeline(const PipelineConfig &config) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);
  const auto out_dir = config.output_dir;
  PipelineResult result;
  result.manifest_path = out_dir / "manifest.json";
  detail::Manifest manifest(result.manifest_path, config);

  std::string stage;
  auto run_stage = [&](const std::string &name, auto &&fn) {
    stage = name;
    log::info(name, "start");
    try {
      fn();
    } catch (const Error &e) {
      log::error(name, e.what());
      manifest.fail(name);
      throw StageError(name, e);
    } catch (const std::exception &e) {
      log::error(name, e.what());
      manifest.fail(name);
      throw StageError(name, DataError(e.what()));
    }
    log::info(name, "done");
  };

  VocabEmbedding ref, oth;
  run_stage("load", [&] {
    for (const auto *src : {&config.reference, &config.other}) {
      if (!std::filesystem::exists(src->path))
        throw DataError("missing embedding file " + src->path.string());
    }
    ref = load_embeddings(config.reference.path,
                          {config.reference.max_words, config.reference.lowercase,
                           config.reference.lang});
    oth = load_embeddings(config.other.path,
                          {config.other.max_words, config.other.lowercase, config.other.lang});
    manifest.input(config.reference.path);
    manifest.input(config.other.path);
  });

  DictionaryLoadOptions dict_opts{config.dict_src_lang, config.dict_tgt_lang, false,
                                  config.dict_lowercase};
  DictionaryPairs train, test;
  run_stage("dict", [&] {
    if (config.prep) {
      const auto &prep = *config.prep;
      if (!std::filesystem::exists(prep.source))
        throw DataError("missing dictionary " + prep.source.string());
      DictionaryPairs dict = load_dictionary(prep.source, dict_opts);
      manifest.input(prep.source);
      std::vector<DictionaryPairs> extra;
      for (const auto &m : prep.merge_with) {
        if (!std::filesystem::exists(m)) throw DataError("missing dictionary " + m.string());
        DictionaryPairs e = load_dictionary(m, dict_opts);
        e.src_lang = dict.src_lang;
        e.tgt_lang = dict.tgt_lang;
        extra.push_back(std::move(e));
        manifest.input(m);
      }
      if (prep.order == PrepOrder::merge_then_clean) {
        for (const auto &e : extra) dict = merge_dictionaries(dict, e);
        dict = clean_dictionary(dict);
      } else {
        dict = clean_dictionary(dict);
        for (const auto &e : extra) dict = merge_dictionaries(dict, clean_dictionary(e));
      }
      auto split = split_dictionary(dict, prep.test_size, *config.seed);
      train = std::move(split.train);
      test = std::move(split.test);
      save_dictionary(train, out_dir / "train.tsv");
      save_dictionary(test, out_dir / "test.tsv");
      manifest.artifact(out_dir / "train.tsv");
      manifest.artifact(out_dir / "test.tsv");
    } else {
      for (const auto *p : {&config.train_dict, &config.test_dict})
        if (!std::filesystem::exists(*p)) throw DataError("missing dictionary " + p->string());
      train = load_dictionary(config.train_dict, dict_opts);
      test = load_dictionary(config.test_dict, dict_opts);
      manifest.input(config.train_dict);
      manifest.input(config.test_dict);
    }
  });

  MultiSpace ms;
  run_stage("align", [&] {
    switch (config.method) {
      case AlignMethod::orthogonal:
        ms = align_orthogonal(ref, oth, train, {config.recipe});
        break;
      case AlignMethod::multistep: {
        MultistepParams params;
        params.reweight_p = config.reweight_p;
        params.reduce_dim = config.reduce_dim;
        params.recipe = config.recipe;
        ms = align_multistep(ref, oth, train, params);
        break;
      }
      case AlignMethod::meemi:
        ms = meemi_bilingual(align_orthogonal(ref, oth, train, {config.recipe}), train);
        break;
    }
    for (const auto &[lang, space] : ms.spaces) {
      auto vec = out_dir / (lang + ".aligned.vec");
      save_embeddings(space.embedding, vec);
      manifest.artifact(vec);
      if (!space.maps_applied.empty()) {
        auto maps = out_dir / (lang + ".aligned.vec.maps");
        save_maps(space.maps_applied, maps);
        manifest.artifact(maps);
      }
    }
  });

  run_stage("eval", [&] {
    const std::string src_lang = test.src_lang.empty() ? ms.hub : test.src_lang;
    const std::string tgt_lang =
        test.tgt_lang.empty() ? oth.language() : test.tgt_lang;
    EvalOptions opts{config.oov_policy, config.label(), 1};
    result.reports.push_back(
        precision_at_k(ms.at(src_lang), ms.at(tgt_lang), test, config.ks, opts));
    result.report_path = out_dir / "report.json";
    detail::write_text(result.report_path,
                       render_report(result.reports, ReportFormat::json));
    detail::write_text(out_dir / "report.txt",
                       render_report(result.reports, ReportFormat::table));
    manifest.artifact(result.report_path);
    manifest.artifact(out_dir / "report.txt");
  });
  manifest.finish();
  return result;
}

}  // namespace xlalign
