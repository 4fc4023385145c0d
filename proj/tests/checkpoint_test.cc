/* Copyright 2026 The dsmgibbs Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "dsmgibbs/checkpoint.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "dsmgibbs/errors.h"

namespace dsmgibbs {
namespace {

Checkpoint Sample(NetworkKind kind, bool conditioned) {
  Rng rng = make_stream(61, 0);
  const int in = conditioned ? 3 : 2;
  const int out = kind == NetworkKind::kEnergy ? 1 : (kind == NetworkKind::kScore ? 2 : 4);
  Checkpoint c;
  c.kind = kind;
  c.sigma_conditioned = conditioned;
  c.params = numgrad::MlpParams::Random(std::vector<int>{in, 5, 5, out}, rng);
  c.params.mutable_layers()[1].bias = standard_normal(rng, 5);
  c.meta["sigma"] = 0.2;
  c.meta["epochs"] = 100;
  return c;
}

TEST(Fnv1aTest, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  for (auto kind : {NetworkKind::kEnergy, NetworkKind::kScore, NetworkKind::kPosterior}) {
    const Checkpoint c = Sample(kind, kind == NetworkKind::kEnergy);
    const Checkpoint back = parse_checkpoint(serialize_checkpoint(c));
    EXPECT_EQ(back.kind, c.kind);
    EXPECT_EQ(back.sigma_conditioned, c.sigma_conditioned);
    EXPECT_EQ(back.params.widths(), c.params.widths());
    EXPECT_EQ(back.params.flatten(), c.params.flatten());
    EXPECT_EQ(back.meta, c.meta);
  }
}

TEST(CheckpointTest, FileRoundTrip) {
  const Checkpoint c = Sample(NetworkKind::kEnergy, false);
  const std::string path =
      (std::filesystem::temp_directory_path() / "dsmgibbs_ckpt_test.txt").string();
  save_checkpoint(c, path);
  EXPECT_EQ(load_checkpoint(path).params.flatten(), c.params.flatten());
  EXPECT_THROW(load_checkpoint(path + ".missing"), IoError);
}

TEST(CheckpointTest, HeaderLayout) {
  const std::string text = serialize_checkpoint(Sample(NetworkKind::kEnergy, true));
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "dsmgibbs-checkpoint 1");
  std::getline(in, line);
  EXPECT_EQ(line, "kind energy");
  std::getline(in, line);
  EXPECT_EQ(line, "activation swish");
  std::getline(in, line);
  EXPECT_EQ(line, "sigma_conditioned 1");
  std::getline(in, line);
  EXPECT_EQ(line, "widths 3 5 5 1");
}

TEST(CheckpointTest, TruncationIsDetected) {
  const std::string text = serialize_checkpoint(Sample(NetworkKind::kEnergy, false));
  EXPECT_THROW(parse_checkpoint(text.substr(0, text.size() / 2)), ParseError);
  std::string tampered = text;
  const auto pos = tampered.find("layer 1");
  tampered[pos - 3] = tampered[pos - 3] == '1' ? '2' : '1';
  EXPECT_THROW(parse_checkpoint(tampered), ParseError);
}

TEST(CheckpointTest, MakesMatchingModels) {
  EXPECT_TRUE(make_energy_model(Sample(NetworkKind::kEnergy, false))->has_exact_hessian());
  const auto cond = make_energy_model(Sample(NetworkKind::kEnergy, true));
  EXPECT_TRUE(cond->sigma_conditioned());
  EXPECT_EQ(cond->dim(), 2);
  EXPECT_FALSE(make_energy_model(Sample(NetworkKind::kScore, false))->has_exact_hessian());
  EXPECT_THROW(make_energy_model(Sample(NetworkKind::kPosterior, false)), CapabilityError);
}

}  // namespace
}  // namespace dsmgibbs
