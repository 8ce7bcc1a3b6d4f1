// tests/test_align.cpp

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

#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

using namespace xlalign;

namespace {

double max_abs(const Matrix &m) { return m.cwiseAbs().maxCoeff(); }

Matrix composite(const AlignedSpace &s) { return compose(s.maps_applied).matrix; }

// X has orthonormal columns and Z = X R, so both dictionary submatrices
// already have identity covariance.
fixture::RotationFixture orthonormal_fixture(std::size_t n, Eigen::Index d,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix x = fixture::from_dense(
      oracle::gram_schmidt_q(fixture::to_dense(fixture::gaussian(n, d, rng))));
  Matrix r = fixture::random_rotation(d, rng);
  auto en = fixture::words("en", n), tr = fixture::words("tr", n);
  return {r, VocabEmbedding("en", en, x), VocabEmbedding("tr", tr, x * r),
          fixture::pairs_by_index("en", "tr", en, tr)};
}

DictionaryPairs identity_dict(const std::string &a, const std::string &b,
                              const std::vector<std::string> &words) {
  return fixture::pairs_by_index(a, b, words, words);
}

}  // namespace

TEST(AlignOrthogonal, SelfAlignmentIsIdentity) {
  std::mt19937_64 rng(1);
  Matrix m = fixture::gaussian(30, 6, rng);
  auto words = fixture::words("w", 30);
  VocabEmbedding en("en", words, m), tr("tr", words, m);
  auto ms = align_orthogonal(en, tr, identity_dict("en", "tr", words));
  EXPECT_EQ(ms.hub, "en");
  const auto &moved = ms.at("tr");
  ASSERT_EQ(moved.maps_applied.size(), 1u);
  EXPECT_LE(max_abs(moved.maps_applied[0].matrix - Matrix::Identity(6, 6)), 1e-12);
  EXPECT_LE(max_abs(moved.embedding.matrix() - ms.at("en").embedding.matrix()), 1e-12);
  EXPECT_TRUE(ms.at("en").maps_applied.empty());
}

TEST(AlignOrthogonal, RotationIsUndone) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto fx = fixture::rotation_fixture(50, 10, seed);
    auto ms = align_orthogonal(fx.en, fx.tr, fx.dict);
    EXPECT_LE(max_abs(ms.at("tr").embedding.matrix() - ms.at("en").embedding.matrix()),
              1e-6);
    EXPECT_LE((ms.at("tr").maps_applied[0].matrix - fx.rotation.transpose()).norm(), 1e-3);
  }
}

TEST(AlignOrthogonal, AcceptsEitherDictionaryDirection) {
  auto fx = fixture::rotation_fixture(40, 6, 3);
  auto a = align_orthogonal(fx.en, fx.tr, fx.dict);
  auto b = align_orthogonal(fx.en, fx.tr, transposed(fx.dict));
  EXPECT_EQ(a.at("tr").embedding.matrix(), b.at("tr").embedding.matrix());
}

TEST(AlignOrthogonal, KeepsUnitNormAndDistances) {
  auto fx = fixture::rotation_fixture(40, 8, 9, 0.05);
  auto ms = align_orthogonal(fx.en, fx.tr, fx.dict);
  const auto &moved = ms.at("tr");
  EXPECT_EQ(moved.embedding.norm_recipe(), default_recipe());
  auto before = normalize(fx.tr, default_recipe()).matrix();
  Matrix g0 = before * before.transpose();
  Matrix g1 = moved.embedding.matrix() * moved.embedding.matrix().transpose();
  EXPECT_LE(max_abs(g0 - g1), 1e-12);
}

TEST(AlignOrthogonal, ReplayReproducesSpace) {
  auto fx = fixture::rotation_fixture(40, 8, 10, 0.05);
  auto ms = align_orthogonal(fx.en, fx.tr, fx.dict);
  auto replay = apply_maps(fx.tr, ms.at("tr").maps_applied);
  EXPECT_LE(max_abs(replay.matrix() - ms.at("tr").embedding.matrix()), 1e-15);
}

TEST(AlignOrthogonal, SameLanguageRejected) {
  auto fx = fixture::rotation_fixture(10, 4, 1);
  EXPECT_THROW(align_orthogonal(fx.en, fx.en, fx.dict), DataError);
}

TEST(AlignMultistep, DegeneratePipelineIsIdentity) {
  std::mt19937_64 rng(2);
  auto words = fixture::words("w", 40);
  Matrix m = fixture::gaussian(40, 6, rng);
  VocabEmbedding en("en", words, m), tr("tr", words, m);
  MultistepParams p;
  p.reweight_p = 0;
  auto ms = align_multistep(en, tr, identity_dict("en", "tr", words), p);
  EXPECT_LE(max_abs(composite(ms.at("tr")) - Matrix::Identity(6, 6)), 1e-5);
  EXPECT_LE(max_abs(composite(ms.at("en")) - Matrix::Identity(6, 6)), 1e-5);
}

TEST(AlignMultistep, NoWhiteningMatchesOrthogonal) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto fx = orthonormal_fixture(30, 5, seed);
    MultistepParams p;
    p.reweight_p = 0;
    p.whiten = false;
    p.recipe = {};
    auto multi = align_multistep(fx.en, fx.tr, fx.dict, p);
    auto ortho = align_orthogonal(fx.en, fx.tr, fx.dict, {{}});
    for (const auto *lang : {"en", "tr"})
      EXPECT_LE(max_abs(multi.at(lang).embedding.matrix() -
                        ortho.at(lang).embedding.matrix()),
                1e-6);
  }
}

TEST(AlignMultistep, WhiteningOnIdentityCovarianceMatchesOrthogonal) {
  auto fx = orthonormal_fixture(30, 5, 21);
  MultistepParams p;
  p.reweight_p = 0;
  p.recipe = {};
  auto multi = align_multistep(fx.en, fx.tr, fx.dict, p);
  auto ortho = align_orthogonal(fx.en, fx.tr, fx.dict, {{}});
  for (const auto *lang : {"en", "tr"})
    EXPECT_LE(max_abs(multi.at(lang).embedding.matrix() - ortho.at(lang).embedding.matrix()),
              1e-6);
}

TEST(AlignMultistep, FullReduceDimIsNoOp) {
  auto fx = fixture::rotation_fixture(40, 6, 4, 0.05);
  MultistepParams p;
  auto a = align_multistep(fx.en, fx.tr, fx.dict, p);
  p.reduce_dim = 6;
  auto b = align_multistep(fx.en, fx.tr, fx.dict, p);
  EXPECT_EQ(a.at("tr").embedding.matrix(), b.at("tr").embedding.matrix());
}

TEST(AlignMultistep, ReductionTruncates) {
  auto fx = fixture::rotation_fixture(40, 6, 4, 0.05);
  MultistepParams p;
  p.reduce_dim = 3;
  auto ms = align_multistep(fx.en, fx.tr, fx.dict, p);
  EXPECT_EQ(ms.at("tr").embedding.dim(), 3);
  EXPECT_EQ(ms.at("en").embedding.dim(), 3);
  p.reduce_dim = 7;
  EXPECT_THROW(align_multistep(fx.en, fx.tr, fx.dict, p), UsageError);
}

TEST(AlignMultistep, StageLabelsAndReplay) {
  auto fx = fixture::rotation_fixture(40, 6, 5, 0.05);
  auto ms = align_multistep(fx.en, fx.tr, fx.dict);
  std::vector<std::string> labels;
  for (const auto &m : ms.at("tr").maps_applied) labels.push_back(m.label);
  EXPECT_EQ(labels, (std::vector<std::string>{"whiten", "rotate", "reweight", "dewhiten",
                                              "to-reference"}));
  auto replay = apply_maps(fx.tr, ms.at("tr").maps_applied);
  EXPECT_LE(max_abs(replay.matrix() - ms.at("tr").embedding.matrix()), 1e-15);
}

TEST(AlignMultistep, RetrievesRotatedTranslations) {
  auto fx = fixture::rotation_fixture(50, 10, 6, 0.01);
  auto ms = align_multistep(fx.en, fx.tr, fx.dict);
  auto r = precision_at_k(ms.at("en"), ms.at("tr"), fx.dict, {1});
  EXPECT_GE(r.at(1), 0.95);
}

TEST(MeemiBilingual, EqualPointsAreFixed) {
  std::mt19937_64 rng(7);
  auto words = fixture::words("w", 20);
  Matrix m = fixture::gaussian(20, 5, rng);
  MultiSpace ms;
  ms.hub = "en";
  ms.add(AlignedSpace::identity(VocabEmbedding("en", words, m), "en"));
  ms.add(AlignedSpace::identity(VocabEmbedding("tr", words, m), "en"));
  auto out = meemi_bilingual(ms, identity_dict("en", "tr", words));
  for (const auto *lang : {"en", "tr"}) {
    EXPECT_LE(max_abs(out.at(lang).maps_applied.back().matrix - Matrix::Identity(5, 5)),
              1e-9);
    EXPECT_LE(max_abs(out.at(lang).embedding.matrix() - m), 1e-9);
  }
}

TEST(MeemiBilingual, SinglePairMinimumNorm) {
  Matrix e1(1, 2), e2(1, 2);
  e1 << 1, 0;
  e2 << 0, 1;
  MultiSpace ms;
  ms.hub = "en";
  ms.add(AlignedSpace::identity(VocabEmbedding("en", {"a"}, e1), "en"));
  ms.add(AlignedSpace::identity(VocabEmbedding("tr", {"b"}, e2), "en"));
  auto out = meemi_bilingual(ms, {"en", "tr", {{"a", "b"}}, "file"});
  Matrix mid(1, 2);
  mid << 0.5, 0.5;
  EXPECT_LE(max_abs(out.at("en").embedding.matrix() - mid), 1e-15);
  EXPECT_LE(max_abs(out.at("tr").embedding.matrix() - mid), 1e-15);
  // Minimum norm: directions never seen stay at zero.
  Matrix w_en(2, 2);
  w_en << 0.5, 0.5, 0, 0;
  EXPECT_LE(max_abs(out.at("en").maps_applied.back().matrix - w_en), 1e-15);
}

TEST(MeemiBilingual, PullsTranslationsTogether) {
  auto fx = fixture::rotation_fixture(60, 8, 8, 0.2);
  auto aligned = align_orthogonal(fx.en, fx.tr, fx.dict);
  auto out = meemi_bilingual(aligned, fx.dict);
  auto gap = [](const MultiSpace &ms) {
    return (ms.at("en").embedding.matrix() - ms.at("tr").embedding.matrix()).norm();
  };
  EXPECT_LT(gap(out), gap(aligned));
}

TEST(MeemiMultilingual, TwoLanguagesMatchBilingual) {
  auto fx = fixture::rotation_fixture(40, 6, 9, 0.1);
  auto aligned = align_orthogonal(fx.en, fx.tr, fx.dict);
  auto bi = meemi_bilingual(aligned, fx.dict);
  auto multi = meemi_multilingual(aligned.at("en"), {{aligned.at("tr"), fx.dict}},
                                  {"en", "tr"});
  for (const auto *lang : {"en", "tr"}) {
    EXPECT_LE(max_abs(multi.at(lang).maps_applied.back().matrix -
                      bi.at(lang).maps_applied.back().matrix),
              1e-9);
    EXPECT_LE(max_abs(multi.at(lang).embedding.matrix() - bi.at(lang).embedding.matrix()),
              1e-9);
  }
}

TEST(MeemiMultilingual, ThreeCopiesGiveIdentity) {
  std::mt19937_64 rng(10);
  auto words = fixture::words("w", 15);
  Matrix m = fixture::gaussian(15, 4, rng);
  auto hub = AlignedSpace::identity(VocabEmbedding("en", words, m), "en");
  std::vector<HubPair> others = {
      {AlignedSpace::identity(VocabEmbedding("tr", words, m), "en"),
       identity_dict("en", "tr", words)},
      {AlignedSpace::identity(VocabEmbedding("kk", words, m), "en"),
       identity_dict("kk", "en", words)}};
  auto out = meemi_multilingual(hub, others, {"en", "tr", "kk"});
  for (const auto *lang : {"en", "tr", "kk"})
    EXPECT_LE(max_abs(out.at(lang).maps_applied.back().matrix - Matrix::Identity(4, 4)),
              1e-9);
}

TEST(MeemiMultilingual, SmallInstanceMatchesOracle) {
  // Hub words a, b in 2-d; two other languages each translating both.
  Matrix en(2, 2), tr(2, 2), kk(2, 2);
  en << 1, 0, 0, 1;
  tr << 2, 1, 0, 1;
  kk << 1, 1, -1, 2;
  auto hub = AlignedSpace::identity(VocabEmbedding("en", {"a", "b"}, en), "en");
  std::vector<HubPair> others = {
      {AlignedSpace::identity(VocabEmbedding("tr", {"ta", "tb"}, tr), "en"),
       {"en", "tr", {{"a", "ta"}, {"b", "tb"}}, "file"}},
      {AlignedSpace::identity(VocabEmbedding("kk", {"ka", "kb"}, kk), "en"),
       {"en", "kk", {{"a", "ka"}, {"b", "kb"}}, "file"}}};
  auto out = meemi_multilingual(hub, others, {"en", "tr", "kk"});

  Matrix mean = (en + tr + kk) / 3.0;
  Matrix want_mean(2, 2);
  want_mean << 4.0 / 3, 2.0 / 3, -1.0 / 3, 4.0 / 3;
  EXPECT_LE(max_abs(mean - want_mean), 1e-15);
  for (const auto &[lang, src] :
       std::vector<std::pair<std::string, Matrix>>{{"en", en}, {"tr", tr}, {"kk", kk}}) {
    Matrix want = fixture::from_dense(
        oracle::normal_equations_solve(fixture::to_dense(src), fixture::to_dense(mean)));
    EXPECT_LE(max_abs(out.at(lang).maps_applied.back().matrix - want), 1e-12) << lang;
    EXPECT_LE(max_abs(out.at(lang).embedding.matrix() - mean), 1e-12) << lang;
  }
}

TEST(MeemiMultilingual, SourceLanguagesMustCoverTuple) {
  Matrix two(2, 2);
  two << 1, 0, 0, 1;
  auto hub = AlignedSpace::identity(VocabEmbedding("en", {"a", "b"}, two), "en");
  std::vector<HubPair> others = {
      {AlignedSpace::identity(VocabEmbedding("tr", {"ta", "tb"}, two), "en"),
       {"en", "tr", {{"a", "ta"}, {"b", "tb"}}, "file"}},
      {AlignedSpace::identity(VocabEmbedding("kk", {"ka", "kb"}, two), "en"),
       {"en", "kk", {{"a", "ka"}}, "file"}}};
  // kk is a source: only hub word a forms a tuple, so tr sees one row.
  auto strict = meemi_multilingual(hub, others, {"en", "tr", "kk"});
  EXPECT_EQ(strict.at("tr").maps_applied.back().matrix(1, 1), 0.0);
  // kk only as a target: both hub words form tuples.
  auto loose = meemi_multilingual(hub, others, {"en", "tr"});
  EXPECT_NE(loose.at("tr").maps_applied.back().matrix(1, 1), 0.0);
}

TEST(MeemiMultilingual, AllCombinationsUsesEveryTranslation) {
  Matrix hub_m(1, 2), tr_m(2, 2);
  hub_m << 1, 0;
  tr_m << 0, 1, 0, 3;
  auto hub = AlignedSpace::identity(VocabEmbedding("en", {"a"}, hub_m), "en");
  std::vector<HubPair> others = {
      {AlignedSpace::identity(VocabEmbedding("tr", {"x", "y"}, tr_m), "en"),
       {"en", "tr", {{"a", "x"}, {"a", "y"}}, "file"}}};
  auto first = meemi_multilingual(hub, others, {"en"});
  MeemiOptions all;
  all.all_combinations = true;
  auto every = meemi_multilingual(hub, others, {"en"}, all);
  // First-translation mode pairs a with x only: midpoint (0.5, 0.5).
  EXPECT_NEAR(first.at("en").embedding.matrix()(0, 1), 0.5, 1e-15);
  // Both combinations: hub row fits the two midpoints in least squares.
  EXPECT_NEAR(every.at("en").embedding.matrix()(0, 1), 1.0, 1e-12);
}

TEST(MeemiMultilingual, Errors) {
  Matrix one(1, 2);
  one << 1, 0;
  auto hub = AlignedSpace::identity(VocabEmbedding("en", {"a"}, one), "en");
  std::vector<HubPair> others = {
      {AlignedSpace::identity(VocabEmbedding("tr", {"x"}, one), "en"),
       {"en", "tr", {{"b", "x"}}, "file"}}};
  EXPECT_THROW(meemi_multilingual(hub, others, {"en"}), DataError);
  EXPECT_THROW(meemi_multilingual(hub, {}, {"en"}), DataError);
  EXPECT_THROW(meemi_multilingual(hub, others, {"tr"}), UsageError);
}
