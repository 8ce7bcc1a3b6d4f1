// xlalign/align.hpp

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

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xlalign/dictionary.hpp"
#include "xlalign/embio.hpp"
#include "xlalign/error.hpp"
#include "xlalign/log.hpp"
#include "xlalign/mapping.hpp"

namespace xlalign {

/// An embedding after it has been carried into a shared space, plus the maps
/// that carried it there (applied in order to the normalized input).
struct AlignedSpace {
  VocabEmbedding embedding;
  std::string language;
  std::vector<LinearMap> maps_applied;
  std::string reference_language;

  static AlignedSpace identity(VocabEmbedding emb, std::string reference_language) {
    std::string lang = emb.language();
    return {std::move(emb), std::move(lang), {}, std::move(reference_language)};
  }
};

struct MultiSpace {
  std::map<std::string, AlignedSpace> spaces;
  std::string hub;

  const AlignedSpace &at(const std::string &language) const {
    auto it = spaces.find(language);
    if (it == spaces.end()) throw DataError("no aligned space for '" + language + "'");
    return it->second;
  }

  void add(AlignedSpace space) {
    std::string lang = space.language;
    if (!spaces.emplace(lang, std::move(space)).second)
      throw DataError("language '" + lang + "' appears twice");
  }
};

/// Replays a map chain on `original`, normalizing it first with the recipe
/// the first map assumes when it has not been normalized yet.
inline VocabEmbedding apply_maps(const VocabEmbedding &original,
                                 const std::vector<LinearMap> &maps) {
  if (maps.empty()) return original;
  VocabEmbedding base = original.norm_recipe().empty()
                            ? ensure_normalized(original, maps.front().assumes_norm)
                            : original;
  Matrix m = base.matrix();
  bool all_orthogonal = true;
  for (const auto &map : maps) {
    m = map.apply(m);
    all_orthogonal = all_orthogonal && map.kind == MapKind::orthogonal;
  }
  // Orthogonal maps keep unit rows unit; anything else voids the recipe.
  return base.with_matrix(std::move(m),
                          all_orthogonal ? base.norm_recipe() : NormRecipe{});
}

namespace detail {

inline AlignedSpace extend(const AlignedSpace &space, LinearMap map) {
  AlignedSpace out = space;
  const NormRecipe &recipe = space.embedding.norm_recipe();
  out.embedding = space.embedding.with_matrix(
      map.apply(space.embedding.matrix()),
      map.kind == MapKind::orthogonal ? recipe : NormRecipe{});
  out.maps_applied.push_back(std::move(map));
  return out;
}

inline void require_distinct(const VocabEmbedding &a, const VocabEmbedding &b) {
  if (a.language() == b.language())
    throw DataError("both embeddings are tagged '" + a.language() +
                    "'; give them distinct language codes");
  if (a.dim() != b.dim())
    throw DataError("dimension mismatch: " + a.language() + " has " +
                    std::to_string(a.dim()) + ", " + b.language() + " has " +
                    std::to_string(b.dim()));
}

}  // namespace detail

struct AlignOptions {
  NormRecipe recipe = default_recipe();
};

/// Maps `other` into the fixed `reference` space with the orthogonal map
/// fitted on the dictionary. The dictionary may be stored in either
/// direction.
inline MultiSpace align_orthogonal(const VocabEmbedding &reference,
                                   const VocabEmbedding &other,
                                   const DictionaryPairs &dict,
                                   const AlignOptions &options = {}) {
  detail::require_distinct(reference, other);
  VocabEmbedding ref = ensure_normalized(reference, options.recipe);
  VocabEmbedding oth = ensure_normalized(other, options.recipe);
  PairedMatrices pm =
      build_paired_matrices(oth, ref, oriented(dict, oth.language(), ref.language()));
  log::info("align", "orthogonal " + oth.language() + "->" + ref.language() + " on " +
                         std::to_string(pm.used_pairs.size()) + " pairs (" +
                         std::to_string(pm.oov_src) + "/" + std::to_string(pm.oov_tgt) +
                         " OOV)");
  LinearMap w = procrustes(pm);
  w.assumes_norm = options.recipe;

  MultiSpace out;
  out.hub = ref.language();
  out.add(AlignedSpace::identity(ref, ref.language()));
  AlignedSpace moved = AlignedSpace::identity(oth, ref.language());
  out.add(detail::extend(moved, std::move(w)));
  return out;
}

enum class Dewhiten { none, own, other };

struct MultistepParams {
  double reweight_p = 0.5;
  std::optional<Eigen::Index> reduce_dim;
  bool whiten = true;
  Dewhiten dewhiten = Dewhiten::other;
  NormRecipe recipe = default_recipe();
};

/// Whitening, orthogonal mapping, singular-value re-weighting, de-whitening
/// and optional truncation, applied to both sides. Without truncation both
/// sides are finally rotated back into the reference coordinates.
inline MultiSpace align_multistep(const VocabEmbedding &reference,
                                  const VocabEmbedding &other,
                                  const DictionaryPairs &dict,
                                  const MultistepParams &params = {}) {
  detail::require_distinct(reference, other);
  if (params.reweight_p < 0) throw UsageError("reweight power must be non-negative");
  VocabEmbedding ref = ensure_normalized(reference, params.recipe);
  VocabEmbedding oth = ensure_normalized(other, params.recipe);
  PairedMatrices pm =
      build_paired_matrices(oth, ref, oriented(dict, oth.language(), ref.language()));
  const Eigen::Index d = ref.dim();
  std::optional<Eigen::Index> reduce = params.reduce_dim;
  if (reduce && (*reduce <= 0 || *reduce > d))
    throw UsageError("reduced dimension must lie in [1, " + std::to_string(d) + "]");
  if (reduce && *reduce == d) reduce.reset();

  WhiteningPair wx{Matrix::Identity(d, d), Matrix::Identity(d, d)};
  WhiteningPair wz = wx;
  if (params.whiten) {
    wx = whitening_pair(pm.X);
    wz = whitening_pair(pm.Z);
  }
  Svd svd = cross_covariance_svd(pm.X * wx.inv_sqrt, pm.Z * wz.inv_sqrt);
  Vector weights(svd.s.size());
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    weights(i) = std::pow(svd.s(i), params.reweight_p);
  Matrix reweight = weights.asDiagonal();

  const Matrix dewhiten_by_x = svd.U.transpose() * wx.sqrt * svd.U;
  const Matrix dewhiten_by_z = svd.V.transpose() * wz.sqrt * svd.V;
  Matrix dewhiten_oth = Matrix::Identity(d, d), dewhiten_ref = Matrix::Identity(d, d);
  if (params.dewhiten == Dewhiten::own) {
    dewhiten_oth = dewhiten_by_x;
    dewhiten_ref = dewhiten_by_z;
  } else if (params.dewhiten == Dewhiten::other) {
    dewhiten_oth = dewhiten_by_z;
    dewhiten_ref = dewhiten_by_x;
  }

  auto stages = [&](const Matrix &whiten, const Matrix &rotate, const Matrix &dewhiten) {
    std::vector<LinearMap> maps;
    maps.push_back({whiten, MapKind::whitening, params.recipe, "whiten"});
    maps.push_back({rotate, MapKind::orthogonal, params.recipe, "rotate"});
    maps.push_back({reweight, MapKind::unconstrained, params.recipe, "reweight"});
    maps.push_back({dewhiten, MapKind::composite, params.recipe, "dewhiten"});
    if (reduce) {
      maps.push_back({Matrix::Identity(d, *reduce), MapKind::unconstrained,
                      params.recipe, "reduce"});
    } else {
      maps.push_back({svd.V.transpose(), MapKind::orthogonal, params.recipe,
                      "to-reference"});
    }
    return maps;
  };

  log::info("align", "multistep " + oth.language() + "->" + ref.language() + " on " +
                         std::to_string(pm.used_pairs.size()) + " pairs, p=" +
                         std::to_string(params.reweight_p));
  MultiSpace out;
  out.hub = ref.language();
  AlignedSpace r = AlignedSpace::identity(ref, ref.language());
  AlignedSpace o = AlignedSpace::identity(oth, ref.language());
  for (auto &map : stages(wz.inv_sqrt, svd.V, dewhiten_ref)) r.maps_applied.push_back(map);
  for (auto &map : stages(wx.inv_sqrt, svd.U, dewhiten_oth)) o.maps_applied.push_back(map);
  r.embedding = apply_maps(ref, r.maps_applied);
  o.embedding = apply_maps(oth, o.maps_applied);
  out.add(std::move(r));
  out.add(std::move(o));
  return out;
}

struct MeemiOptions {
  // Use every combination of translations of a hub word instead of the first
  // translation per language.
  bool all_combinations = false;
  LeastSquaresOptions least_squares;
};

/// Moves both spaces of an aligned pair towards the midpoints of the
/// dictionary translations with one least-squares map per side.
inline MultiSpace meemi_bilingual(const MultiSpace &ms, const DictionaryPairs &dict,
                                  const MeemiOptions &options = {}) {
  if (ms.spaces.size() != 2) throw DataError("bilingual Meemi needs exactly two spaces");
  const AlignedSpace &hub = ms.at(ms.hub);
  const AlignedSpace *other = nullptr;
  for (const auto &[lang, space] : ms.spaces)
    if (lang != ms.hub) other = &space;
  if (!other) throw DataError("no non-hub space to post-process");
  PairedMatrices pm = build_paired_matrices(
      other->embedding, hub.embedding, oriented(dict, other->language, hub.language));
  Matrix mid = 0.5 * (pm.X + pm.Z);
  LinearMap w_other = least_squares_map(pm.X, mid, options.least_squares);
  LinearMap w_hub = least_squares_map(pm.Z, mid, options.least_squares);
  w_other.label = w_hub.label = "meemi";
  w_other.assumes_norm = other->embedding.norm_recipe();
  w_hub.assumes_norm = hub.embedding.norm_recipe();
  log::info("meemi", "bilingual " + other->language + "/" + hub.language + " on " +
                         std::to_string(pm.used_pairs.size()) + " pairs");
  MultiSpace out;
  out.hub = ms.hub;
  out.add(detail::extend(hub, std::move(w_hub)));
  out.add(detail::extend(*other, std::move(w_other)));
  return out;
}

struct HubPair {
  AlignedSpace space;
  DictionaryPairs dict;  // hub <-> space.language, either direction
};

/// Hub-based Meemi over several languages. Translation tuples are formed by
/// joining the dictionaries on the hub word: every language in
/// `source_languages` must cover the hub word for the tuple to exist, other
/// languages join the tuple whenever their dictionary covers it. Each tuple's
/// members are pulled towards the tuple mean by one least-squares map per
/// language.
inline MultiSpace meemi_multilingual(const AlignedSpace &hub,
                                     const std::vector<HubPair> &others,
                                     const std::set<std::string> &source_languages,
                                     const MeemiOptions &options = {}) {
  if (others.empty()) throw DataError("multilingual Meemi needs at least one other space");
  if (!source_languages.count(hub.language))
    throw UsageError("source languages must include the hub '" + hub.language + "'");
  std::set<std::string> known{hub.language};
  for (const auto &o : others) {
    if (!known.insert(o.space.language).second)
      throw DataError("language '" + o.space.language + "' appears twice");
    if (o.space.embedding.dim() != hub.embedding.dim())
      throw DataError("dimension mismatch for '" + o.space.language + "'");
    if (o.space.reference_language != hub.language)
      throw DataError("space '" + o.space.language + "' is not aligned to hub '" +
                      hub.language + "'");
  }
  for (const auto &s : source_languages)
    if (!known.count(s)) throw UsageError("source language '" + s + "' is not aligned");

  // Per language: hub word -> in-vocabulary translations in dictionary order.
  struct Coverage {
    std::unordered_map<std::string, std::vector<std::size_t>> translations;
    bool source = false;
  };
  std::vector<Coverage> coverage(others.size());
  std::vector<std::string> hub_words;
  std::unordered_map<std::string, std::size_t> hub_index;
  for (std::size_t l = 0; l < others.size(); ++l) {
    const auto &space = others[l].space;
    coverage[l].source = source_languages.count(space.language) > 0;
    DictionaryPairs d = oriented(others[l].dict, hub.language, space.language);
    for (const auto &p : d.pairs) {
      auto h = hub.embedding.index_of(p.src);
      auto t = space.embedding.index_of(p.tgt);
      if (!h || !t) continue;
      if (hub_index.emplace(p.src, *h).second) hub_words.push_back(p.src);
      coverage[l].translations[p.src].push_back(*t);
    }
  }

  const auto dim = hub.embedding.dim();
  // Rows gathered per language: (vocabulary row, tuple index). Index 0 is the
  // hub, l + 1 is others[l].
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> rows(others.size() + 1);
  std::vector<Vector> means;
  for (const auto &word : hub_words) {
    std::vector<std::size_t> members;
    bool complete = true;
    for (std::size_t l = 0; l < others.size(); ++l) {
      bool covers = coverage[l].translations.count(word) > 0;
      if (coverage[l].source && !covers) complete = false;
      if (covers) members.push_back(l);
    }
    if (!complete || members.empty()) continue;

    std::vector<std::size_t> choice(members.size(), 0);
    while (true) {
      const std::size_t h = hub_index.at(word);
      Vector mean = hub.embedding.row(h).transpose();
      for (std::size_t m = 0; m < members.size(); ++m) {
        const auto &trans = coverage[members[m]].translations.at(word);
        mean += others[members[m]].space.embedding.row(trans[choice[m]]).transpose();
      }
      mean /= static_cast<double>(members.size() + 1);
      const std::size_t tuple = means.size();
      means.push_back(std::move(mean));
      rows[0].emplace_back(h, tuple);
      for (std::size_t m = 0; m < members.size(); ++m)
        rows[members[m] + 1].emplace_back(
            coverage[members[m]].translations.at(word)[choice[m]], tuple);

      if (!options.all_combinations) break;
      // Odometer over translation choices.
      std::size_t m = 0;
      for (; m < members.size(); ++m) {
        if (++choice[m] < coverage[members[m]].translations.at(word).size()) break;
        choice[m] = 0;
      }
      if (m == members.size()) break;
    }
  }
  if (means.empty()) throw DataError("no translation tuples could be formed");

  auto fit = [&](const AlignedSpace &space,
                 const std::vector<std::pair<std::size_t, std::size_t>> &r) {
    if (r.empty()) throw DataError("language '" + space.language + "' has no tuples");
    Matrix a(static_cast<Eigen::Index>(r.size()), dim);
    Matrix b(static_cast<Eigen::Index>(r.size()), dim);
    for (std::size_t i = 0; i < r.size(); ++i) {
      a.row(static_cast<Eigen::Index>(i)) = space.embedding.row(r[i].first);
      b.row(static_cast<Eigen::Index>(i)) = means[r[i].second].transpose();
    }
    LinearMap w = least_squares_map(a, b, options.least_squares);
    w.label = "meemi";
    w.assumes_norm = space.embedding.norm_recipe();
    return detail::extend(space, std::move(w));
  };

  log::info("meemi", "multilingual over " + std::to_string(others.size() + 1) +
                         " languages, " + std::to_string(means.size()) + " tuples");
  MultiSpace out;
  out.hub = hub.language;
  out.add(fit(hub, rows[0]));
  for (std::size_t l = 0; l < others.size(); ++l)
    out.add(fit(others[l].space, rows[l + 1]));
  return out;
}

}  // namespace xlalign
