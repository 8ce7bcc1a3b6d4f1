// tools/xlalign.cpp

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

// Command-line front end. Exit codes: 0 success, 1 usage, 2 data error,
// 3 external-service error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xlalign/xlalign.hpp"

namespace fs = std::filesystem;
using namespace xlalign;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitService = 3;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return kExitUsage;
    case ErrorKind::data: return kExitData;
    case ErrorKind::service: return kExitService;
  }
  return kExitData;
}

struct EmbeddingFlags {
  std::optional<std::size_t> max_words;
  bool lowercase = false;
  std::string normalize = "unit,center,unit";
};

void add_embedding_flags(CLI::App *cmd, EmbeddingFlags &f) {
  cmd->add_option("--max-words", f.max_words, "Read at most this many vectors per file");
  cmd->add_flag("--lowercase", f.lowercase, "Lowercase words on load (first variant wins)");
  cmd->add_option("--normalize", f.normalize,
                  "Normalization recipe, e.g. unit,center,unit or none")
      ->capture_default_str();
}

VocabEmbedding load_vec(const std::string &path, const std::string &lang,
                        const EmbeddingFlags &f) {
  return load_embeddings(path, {f.max_words, f.lowercase, lang});
}

DictionaryPairs load_dict(const std::string &path, const std::string &src,
                          const std::string &tgt, bool lowercase = false) {
  return load_dictionary(path, {src, tgt, false, lowercase});
}

std::vector<std::string> read_wordlist(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word list " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty()) continue;
    auto first = text::split(t, '\t')[0];
    words.emplace_back(text::trim(first));
  }
  return words;
}

void save_space(const AlignedSpace &space, const fs::path &out) {
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_embeddings(space.embedding, out);
  if (!space.maps_applied.empty()) save_maps(space.maps_applied, out.string() + ".maps");
  log::info("write", "wrote " + out.string());
}

fs::path sibling(const fs::path &out, const std::string &lang) {
  return out.parent_path() / (lang + "-aligned.vec");
}

AlignedSpace load_aligned(const std::string &path, const std::string &lang,
                          const std::string &reference, const EmbeddingFlags &f) {
  return AlignedSpace::identity(load_vec(path, lang, f), reference);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"xlalign: cross-lingual word embedding alignment toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  // align
  auto *align = app.add_subcommand("align", "Align one embedding space to a reference");
  std::string method = "orthogonal", ref_path, other_path, dict_path, out_path, out_ref;
  std::string ref_lang, other_lang, dict_src, dict_tgt, dewhiten = "other";
  double reweight_p = 0.5;
  std::optional<Eigen::Index> reduce_dim;
  bool no_whiten = false, dict_lowercase = false;
  EmbeddingFlags emb_flags;
  align->add_option("--method", method, "orthogonal | multistep | meemi")
      ->check(CLI::IsMember({"orthogonal", "multistep", "meemi"}))
      ->capture_default_str();
  align->add_option("--ref", ref_path, "Reference (fixed) embedding file")->required();
  align->add_option("--other", other_path, "Embedding file to map")->required();
  align->add_option("--dict", dict_path, "Training dictionary (either direction)")->required();
  align->add_option("--out", out_path, "Aligned output for --other")->required();
  align->add_option("--out-ref", out_ref, "Output for the reference when the method moves it");
  align->add_option("--ref-lang", ref_lang, "Reference language (default: file name)");
  align->add_option("--other-lang", other_lang, "Other language (default: file name)");
  align->add_option("--dict-src", dict_src, "Dictionary source language");
  align->add_option("--dict-tgt", dict_tgt, "Dictionary target language");
  align->add_flag("--dict-lowercase", dict_lowercase, "Lowercase dictionary entries");
  align->add_option("--reweight-p", reweight_p, "Multistep re-weighting power")
      ->capture_default_str();
  align->add_option("--reduce-dim", reduce_dim, "Multistep output dimension");
  align->add_flag("--no-whiten", no_whiten, "Multistep: skip whitening");
  align->add_option("--dewhiten", dewhiten, "Multistep de-whitening: other | own | none")
      ->check(CLI::IsMember({"other", "own", "none"}))
      ->capture_default_str();
  add_embedding_flags(align, emb_flags);

  // align-multi
  auto *multi = app.add_subcommand("align-multi", "Align several languages to one hub");
  std::string hub_path, hub_lang, sources = "", multi_method = "meemi", out_dir;
  std::vector<std::string> pair_specs;
  bool all_combinations = false;
  multi->add_option("--hub", hub_path, "Hub embedding file")->required();
  multi->add_option("--hub-lang", hub_lang, "Hub language (default: file name)");
  multi->add_option("--pair", pair_specs,
                    "vec:dict for one language, optionally lang=vec:dict")
      ->required();
  multi->add_option("--sources", sources, "Source languages, e.g. en,tr (hub is implied)");
  multi->add_option("--method", multi_method, "orthogonal | meemi")
      ->check(CLI::IsMember({"orthogonal", "meemi"}))
      ->capture_default_str();
  multi->add_option("--out-dir", out_dir, "Directory for <lang>-aligned.vec files")->required();
  multi->add_flag("--all-combinations", all_combinations,
                  "Use every translation combination per hub word");
  add_embedding_flags(multi, emb_flags);

  // meemi
  auto *meemi = app.add_subcommand("meemi", "Meemi post-processing of an aligned pair");
  meemi->add_option("--ref", ref_path, "Aligned reference space")->required();
  meemi->add_option("--other", other_path, "Aligned other space")->required();
  meemi->add_option("--dict", dict_path, "Training dictionary")->required();
  meemi->add_option("--out", out_path, "Output for --other")->required();
  meemi->add_option("--out-ref", out_ref, "Output for --ref");
  meemi->add_option("--ref-lang", ref_lang, "Reference language");
  meemi->add_option("--other-lang", other_lang, "Other language");
  meemi->add_option("--dict-src", dict_src, "Dictionary source language");
  meemi->add_option("--dict-tgt", dict_tgt, "Dictionary target language");

  // induce
  auto *induce_cmd = app.add_subcommand("induce", "Nearest translations of one word");
  std::string src_space, tgt_space, word;
  std::size_t k = 10;
  induce_cmd->add_option("--src-space", src_space, "Aligned source space")->required();
  induce_cmd->add_option("--tgt-space", tgt_space, "Aligned target space")->required();
  induce_cmd->add_option("--word", word, "Source word")->required();
  induce_cmd->add_option("--k", k, "Number of candidates")->capture_default_str();

  // eval
  auto *eval_cmd = app.add_subcommand("eval", "Bilingual dictionary induction P@k");
  std::string test_path, ks_spec = "1,5,10", oov = "skip", format = "table", label, report_out;
  std::string src_lang, tgt_lang;
  std::size_t workers = 1;
  eval_cmd->add_option("--src-space", src_space, "Aligned source space")->required();
  eval_cmd->add_option("--tgt-space", tgt_space, "Aligned target space")->required();
  eval_cmd->add_option("--test", test_path, "Test dictionary")->required();
  eval_cmd->add_option("--k", ks_spec, "Comma-separated k values")->capture_default_str();
  eval_cmd->add_option("--oov-policy", oov, "skip | fail")
      ->check(CLI::IsMember({"skip", "fail"}))
      ->capture_default_str();
  eval_cmd->add_option("--format", format, "json | tsv | table")
      ->check(CLI::IsMember({"json", "tsv", "table"}))
      ->capture_default_str();
  eval_cmd->add_option("--method-label", label, "Row label in the report");
  eval_cmd->add_option("--out", report_out, "Write the report here instead of stdout");
  eval_cmd->add_option("--src-lang", src_lang, "Source language (default: file name)");
  eval_cmd->add_option("--tgt-lang", tgt_lang, "Target language (default: file name)");
  eval_cmd->add_option("--threads", workers, "Retrieval threads")->capture_default_str();

  // dict-build
  auto *build = app.add_subcommand("dict-build", "Round-trip translated dictionary");
  std::string wordlist, src, tgt, endpoint, cache_path, raw_out;
  double rps = 5.0;
  int retries = 4;
  bool replay = false, fold_case = false;
  std::size_t concurrency = 1;
  build->add_option("--wordlist", wordlist, "One source word per line")->required();
  build->add_option("--src", src, "Source language code")->required();
  build->add_option("--tgt", tgt, "Target language code")->required();
  build->add_option("--endpoint", endpoint, "Translation endpoint URL");
  build->add_option("--rps", rps, "Request rate cap")->capture_default_str();
  build->add_option("--cache", cache_path, "Response cache file");
  build->add_flag("--replay", replay, "Serve from --cache only; no network");
  build->add_flag("--fold-case", fold_case, "Case-insensitive round-trip check");
  build->add_option("--concurrency", concurrency, "Parallel requests")->capture_default_str();
  build->add_option("--retries", retries, "Attempts per request")->capture_default_str();
  build->add_option("--raw-out", raw_out, "Also write the forward translations");
  build->add_option("--out", out_path, "Filtered dictionary output")->required();

  // dict-clean
  auto *clean = app.add_subcommand("dict-clean", "Drop duplicate and multi-token pairs");
  std::string in_path;
  clean->add_option("--in", in_path, "Input dictionary")->required();
  clean->add_option("--out", out_path, "Output dictionary")->required();

  // dict-merge
  auto *merge = app.add_subcommand("dict-merge", "Merge dictionaries");
  std::vector<std::string> inputs;
  std::string order = "merge-only";
  merge->add_option("--in", inputs, "Input dictionaries, merged in order")->required();
  merge->add_option("--out", out_path, "Output dictionary")->required();
  merge->add_option("--order", order,
                    "merge-only | merge-then-clean | clean-then-merge")
      ->check(CLI::IsMember({"merge-only", "merge-then-clean", "clean-then-merge"}))
      ->capture_default_str();

  // dict-split
  auto *split = app.add_subcommand("dict-split", "Train/test split by source word");
  std::size_t test_size = 500;
  std::optional<std::uint64_t> seed;
  std::string train_out, test_out;
  split->add_option("--in", in_path, "Input dictionary")->required();
  split->add_option("--test-size", test_size, "Held-out source words")->capture_default_str();
  split->add_option("--seed", seed, "Random seed")->required();
  split->add_option("--train-out", train_out, "Training dictionary output")->required();
  split->add_option("--test-out", test_out, "Test dictionary output")->required();

  // run
  auto *run = app.add_subcommand("run", "Run a configured pipeline");
  std::string config_path, override_out, override_method;
  run->add_option("--config", config_path, "Pipeline config (JSON)")->required();
  run->add_option("--output-dir", override_out, "Override output_dir");
  run->add_option("--seed", seed, "Override seed");
  run->add_option("--method", override_method, "Override method");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  log::set_level(verbose ? log::Level::debug : quiet ? log::Level::warn : log::Level::info);

  try {
    if (*align) {
      VocabEmbedding ref = load_vec(ref_path, ref_lang, emb_flags);
      VocabEmbedding oth = load_vec(other_path, other_lang, emb_flags);
      DictionaryPairs dict = load_dict(dict_path, dict_src, dict_tgt, dict_lowercase);
      NormRecipe recipe = parse_recipe(emb_flags.normalize);
      MultiSpace ms;
      if (method == "orthogonal") {
        ms = align_orthogonal(ref, oth, dict, {recipe});
      } else if (method == "multistep") {
        MultistepParams p;
        p.reweight_p = reweight_p;
        p.reduce_dim = reduce_dim;
        p.whiten = !no_whiten;
        p.dewhiten = dewhiten == "own" ? Dewhiten::own
                     : dewhiten == "none" ? Dewhiten::none
                                          : Dewhiten::other;
        p.recipe = recipe;
        ms = align_multistep(ref, oth, dict, p);
      } else {
        ms = meemi_bilingual(align_orthogonal(ref, oth, dict, {recipe}), dict);
      }
      save_space(ms.at(oth.language()), out_path);
      const AlignedSpace &r = ms.at(ref.language());
      if (!out_ref.empty()) {
        save_space(r, out_ref);
      } else if (!r.maps_applied.empty()) {
        save_space(r, sibling(out_path, ref.language()));
      }
      return kExitOk;
    }

    if (*multi) {
      NormRecipe recipe = parse_recipe(emb_flags.normalize);
      VocabEmbedding hub = load_vec(hub_path, hub_lang, emb_flags);
      std::vector<HubPair> others;
      for (const auto &spec : pair_specs) {
        std::string body = spec, lang;
        if (auto eq = spec.find('='); eq != std::string::npos) {
          lang = spec.substr(0, eq);
          body = spec.substr(eq + 1);
        }
        auto colon = body.rfind(':');
        if (colon == std::string::npos)
          throw UsageError("--pair expects vec:dict, got '" + spec + "'");
        VocabEmbedding emb = load_vec(body.substr(0, colon), lang, emb_flags);
        DictionaryPairs dict = load_dict(body.substr(colon + 1), "", "");
        MultiSpace pair = align_orthogonal(hub, emb, dict, {recipe});
        others.push_back({pair.at(emb.language()), dict});
      }
      AlignedSpace hub_space =
          AlignedSpace::identity(ensure_normalized(hub, recipe), hub.language());
      MultiSpace ms;
      if (multi_method == "meemi") {
        std::set<std::string> source_set{hub.language()};
        for (const auto &s : text::split_list(sources)) source_set.insert(s);
        MeemiOptions opts;
        opts.all_combinations = all_combinations;
        ms = meemi_multilingual(hub_space, others, source_set, opts);
      } else {
        ms.hub = hub.language();
        ms.add(hub_space);
        for (auto &o : others) ms.add(o.space);
      }
      for (const auto &[lang, space] : ms.spaces)
        save_space(space, fs::path(out_dir) / (lang + "-aligned.vec"));
      return kExitOk;
    }

    if (*meemi) {
      EmbeddingFlags raw;
      raw.normalize = "none";
      VocabEmbedding r = load_vec(ref_path, ref_lang, raw);
      AlignedSpace ref = AlignedSpace::identity(r, r.language());
      AlignedSpace oth = load_aligned(other_path, other_lang, r.language(), raw);
      MultiSpace ms;
      ms.hub = ref.language;
      ms.add(ref);
      ms.add(oth);
      ms = meemi_bilingual(ms, load_dict(dict_path, dict_src, dict_tgt));
      save_space(ms.at(oth.language), out_path);
      save_space(ms.at(ref.language), out_ref.empty() ? sibling(out_path, ref.language)
                                                      : fs::path(out_ref));
      return kExitOk;
    }

    if (*induce_cmd) {
      EmbeddingFlags raw;
      VocabEmbedding s = load_vec(src_space, "", raw);
      VocabEmbedding t = load_vec(tgt_space, "", raw);
      auto row = s.index_of(word);
      if (!row) throw DataError("'" + word + "' is not in " + src_space);
      auto target = AlignedSpace::identity(t, t.language());
      for (const auto &c : induce(s.row(*row).transpose(), target, std::min(k, t.size())))
        std::cout << c.word << '\t' << text::format_double(c.score) << '\n';
      return kExitOk;
    }

    if (*eval_cmd) {
      EmbeddingFlags raw;
      VocabEmbedding s = load_vec(src_space, src_lang, raw);
      VocabEmbedding t = load_vec(tgt_space, tgt_lang, raw);
      DictionaryPairs test = load_dict(test_path, s.language(), t.language());
      std::vector<int> ks;
      for (const auto &item : text::split_list(ks_spec)) {
        auto v = text::parse_int<int>(item);
        if (!v) throw UsageError("bad k value '" + item + "'");
        ks.push_back(*v);
      }
      EvalOptions opts{parse_oov_policy(oov), label.empty() ? "aligned" : label, workers};
      auto report = precision_at_k(AlignedSpace::identity(s, s.language()),
                                   AlignedSpace::identity(t, s.language()), test, ks, opts);
      std::string rendered = render_report({report}, parse_report_format(format));
      if (report_out.empty()) {
        std::cout << rendered;
      } else {
        std::ofstream out(report_out, std::ios::binary);
        if (!out) throw DataError("cannot write " + report_out);
        out << rendered;
      }
      return kExitOk;
    }

    if (*build) {
      std::shared_ptr<TranslationClient> client;
      if (replay) {
        if (cache_path.empty()) throw UsageError("--replay needs --cache");
        client = std::make_shared<ReplayTranslationClient>(
            std::make_shared<TranslationCache>(cache_path));
      } else {
        if (endpoint.empty()) throw UsageError("--endpoint is required unless --replay is set");
        HttpClientOptions http;
        http.endpoint = endpoint;
        http.api_key = api_key_from_env();
        http.rps = rps;
        http.retry.max_attempts = std::max(1, retries);
        client = std::make_shared<HttpTranslationClient>(http);
        if (!cache_path.empty())
          client = std::make_shared<CachingTranslationClient>(
              client, std::make_shared<TranslationCache>(cache_path));
      }
      auto words = read_wordlist(wordlist);
      auto forward = translate_wordlist(*client, words, src, tgt, {concurrency});
      if (!raw_out.empty()) save_dictionary(forward.dict, raw_out);
      auto filtered = reverse_filter(*client, forward.dict, {fold_case, concurrency});
      save_dictionary(filtered.dict, out_path);
      std::cerr << "requested " << forward.stats.requested << ", translated "
                << forward.stats.translated << ", multi-token "
                << forward.stats.dropped_multi_token << ", untranslated "
                << forward.stats.untranslated << ", failed " << forward.stats.failed
                << ", kept after reverse translation " << filtered.kept << " (mismatched "
                << filtered.mismatched << ", back-translation failed " << filtered.failed
                << ")\n";
      if (forward.stats.failed > 0 && forward.stats.translated == 0 &&
          forward.stats.untranslated == 0 && forward.stats.dropped_multi_token == 0)
        return kExitService;
      return kExitOk;
    }

    if (*clean) {
      save_dictionary(clean_dictionary(load_dict(in_path, "", "")), out_path);
      return kExitOk;
    }

    if (*merge) {
      std::vector<DictionaryPairs> dicts;
      for (const auto &p : inputs) {
        DictionaryPairs d = load_dict(p, "", "");
        if (!dicts.empty()) {
          d.src_lang = dicts.front().src_lang;
          d.tgt_lang = dicts.front().tgt_lang;
        }
        if (order == "clean-then-merge") d = clean_dictionary(d);
        dicts.push_back(std::move(d));
      }
      DictionaryPairs merged = dicts.front();
      merged.provenance = "merged";
      for (std::size_t i = 1; i < dicts.size(); ++i)
        merged = merge_dictionaries(merged, dicts[i]);
      if (dicts.size() == 1) merged = merge_dictionaries(merged, {merged.src_lang, merged.tgt_lang, {}, ""});
      if (order == "merge-then-clean") merged = clean_dictionary(merged);
      save_dictionary(merged, out_path);
      return kExitOk;
    }

    if (*split) {
      auto parts = split_dictionary(load_dict(in_path, "", ""), test_size, *seed);
      save_dictionary(parts.train, train_out);
      save_dictionary(parts.test, test_out);
      std::cerr << "train " << parts.train.size() << " pairs, test " << parts.test.size()
                << " pairs\n";
      return kExitOk;
    }

    if (*run) {
      PipelineConfig config = load_pipeline_config(config_path);
      if (!override_out.empty()) config.output_dir = override_out;
      if (seed) config.seed = seed;
      if (!override_method.empty()) config.method = parse_align_method(override_method);
      auto result = run_pipeline(config);
      log::info("run", "report written to " + result.report_path.string());
      return kExitOk;
    }
  } catch (const Error &e) {
    log::error("main", e.what());
    return exit_code(e.kind());
  } catch (const std::exception &e) {
    log::error("main", e.what());
    return kExitData;
  }
  return kExitUsage;
}
