// tests/test_pipeline.cpp

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

#include "fixtures.hpp"

using namespace xlalign;
using fixture::TempDir;

TEST(PipelineConfig, ParsesAndResolvesPaths) {
  TempDir dir("cfg");
  auto path = fixture::write_rotation_run(dir.path());
  auto c = load_pipeline_config(path);
  EXPECT_EQ(c.method, AlignMethod::orthogonal);
  EXPECT_EQ(c.reference.path, dir / "en.vec");
  EXPECT_EQ(c.output_dir, dir / "out");
  EXPECT_EQ(c.ks, (std::vector<int>{1, 5, 10}));
  EXPECT_EQ(c.seed, std::optional<std::uint64_t>(11));
  EXPECT_EQ(c.label(), "VecMap");
}

TEST(PipelineConfig, Rejections) {
  auto base = nlohmann::json::parse(R"({"reference":{"path":"a"},"other":{"path":"b"}})");
  EXPECT_THROW(parse_pipeline_config(nlohmann::json::object()), UsageError);
  auto bad_method = base;
  bad_method["method"] = "magic";
  EXPECT_THROW(parse_pipeline_config(bad_method), UsageError);
  auto prep = base;
  prep["dict_prep"] = {{"source", "d.tsv"}};
  // A split without a seed cannot be reproduced.
  EXPECT_THROW(parse_pipeline_config(prep).validate(), UsageError);
  prep["seed"] = 3;
  EXPECT_NO_THROW(parse_pipeline_config(prep).validate());
  EXPECT_THROW(parse_pipeline_config(base).validate(), UsageError);
}

TEST(RunPipeline, RotationFixtureIsPerfect) {
  TempDir dir("run");
  auto result = run_pipeline(load_pipeline_config(fixture::write_rotation_run(dir.path())));
  ASSERT_EQ(result.reports.size(), 1u);
  EXPECT_EQ(result.reports[0].precision, (std::vector<double>{1.0, 1.0, 1.0}));
  for (const auto *name : {"report.json", "report.txt", "manifest.json", "en.aligned.vec",
                           "tr.aligned.vec", "tr.aligned.vec.maps"})
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / name)) << name;
  auto manifest = nlohmann::json::parse(read_file(result.manifest_path));
  EXPECT_EQ(manifest["status"], "complete");
  EXPECT_EQ(manifest["inputs"].size(), 4u);
  EXPECT_EQ(manifest["artifacts"]["report.json"], sha256_file(result.report_path));
  EXPECT_EQ(read_file(dir / "out" / "report.txt"),
            "Method  tr@1  tr@5  tr@10\nVecMap  100.0  100.0  100.0\n");
}

TEST(RunPipeline, RepeatRunsAreByteIdentical) {
  TempDir dir("run");
  auto config = load_pipeline_config(fixture::write_rotation_run(dir.path()));
  auto first = run_pipeline(config);
  auto report = read_file(first.report_path);
  auto manifest = read_file(first.manifest_path);
  auto second = run_pipeline(config);
  EXPECT_EQ(read_file(second.report_path), report);
  EXPECT_EQ(read_file(second.manifest_path), manifest);
}

TEST(RunPipeline, MapsReplayTheAlignedSpace) {
  TempDir dir("run");
  auto result = run_pipeline(load_pipeline_config(fixture::write_rotation_run(dir.path())));
  auto original = load_embeddings(dir / "tr.vec");
  auto maps = load_maps(dir / "out" / "tr.aligned.vec.maps");
  auto replay = apply_maps(original, maps);
  auto stored = load_embeddings(dir / "out" / "tr.aligned.vec");
  EXPECT_EQ(replay.matrix(), stored.matrix());
}

TEST(RunPipeline, MissingDictionaryIsStageTagged) {
  TempDir dir("run");
  auto config = load_pipeline_config(fixture::write_rotation_run(dir.path()));
  config.train_dict = dir / "nope.tsv";
  try {
    run_pipeline(config);
    FAIL();
  } catch (const StageError &e) {
    EXPECT_EQ(e.stage(), "dict");
    EXPECT_EQ(e.kind(), ErrorKind::data);
    EXPECT_NE(std::string(e.what()).find("[stage=dict]"), std::string::npos);
  }
  auto manifest = nlohmann::json::parse(read_file(config.output_dir / "manifest.json"));
  EXPECT_EQ(manifest["status"], "failed");
  EXPECT_EQ(manifest["failed_stage"], "dict");
}

TEST(RunPipeline, DictPrepSplitsWithSeed) {
  TempDir dir("run");
  fixture::write_rotation_run(dir.path());
  auto config = load_pipeline_config(dir / "config.json");
  DictPrep prep;
  prep.source = dir / "en-tr.train.tsv";
  prep.test_size = 10;
  config.prep = prep;
  config.method = AlignMethod::meemi;
  auto a = run_pipeline(config);
  auto train_a = read_file(config.output_dir / "train.tsv");
  auto b = run_pipeline(config);
  EXPECT_EQ(read_file(config.output_dir / "train.tsv"), train_a);
  EXPECT_EQ(a.reports, b.reports);
  EXPECT_EQ(a.reports[0].evaluated, 10u);
  EXPECT_EQ(a.reports[0].at(1), 1.0);
}

TEST(RunPipeline, MultistepMethod) {
  TempDir dir("run");
  auto config = load_pipeline_config(fixture::write_rotation_run(dir.path()));
  config.method = AlignMethod::multistep;
  auto r = run_pipeline(config);
  EXPECT_EQ(r.reports[0].at(1), 1.0);
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
