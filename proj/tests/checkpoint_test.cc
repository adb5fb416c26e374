// Copyright 2026 The claimx Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstring>

#include "claimx/checkpoint.hpp"
#include "claimx/nn.hpp"
#include "test_util.hpp"

namespace claimx {
namespace {

ParameterSet make_params(int hidden, std::uint64_t seed) {
  ParameterSet ps;
  Rng rng(seed);
  LstmCellParams::create(ps, "enc", 3, hidden, rng);
  Linear::create(ps, "head.out", hidden, 2, rng);
  return ps;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  ParameterSet a = make_params(4, 1);
  const nlohmann::json meta = {{"labels", {"x", "y"}}, {"dim", 3}};
  const std::string bytes = save_checkpoint(a, meta);
  const Checkpoint ck = load_checkpoint(bytes);
  EXPECT_EQ(ck.metadata, meta);
  ASSERT_EQ(ck.tensors.size(), a.size());
  ParameterSet b = make_params(4, 2);
  restore_parameters(b, ck);
  auto ib = b.begin();
  for (const auto& p : a) {
    EXPECT_EQ((*ib)->name, p->name);
    EXPECT_EQ(std::memcmp((*ib)->value.data(), p->value.data(),
                          sizeof(double) * static_cast<std::size_t>(p->value.size())),
              0);
    ++ib;
  }
  EXPECT_EQ(save_checkpoint(b, meta), bytes);
}

TEST(Checkpoint, HeaderLayout) {
  ParameterSet ps;
  ps.add("w", Tensor::Constant(1, 2, 1.5));
  const std::string bytes = save_checkpoint(ps, nlohmann::json::object());
  ASSERT_GE(bytes.size(), 9u);
  EXPECT_EQ(bytes.substr(0, 8), kCheckpointMagic);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), kCheckpointVersion);
}

TEST(Checkpoint, LoadErrors) {
  ParameterSet ps = make_params(2, 1);
  const std::string good = save_checkpoint(ps, {{"k", 1}});
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(load_checkpoint(bad_magic), CheckpointError);
  std::string bad_version = good;
  bad_version[8] = static_cast<char>(kCheckpointVersion + 1);
  EXPECT_THROW(load_checkpoint(bad_version), CheckpointError);
  for (std::size_t cut : {std::size_t{4}, std::size_t{12}, good.size() / 2, good.size() - 1}) {
    EXPECT_THROW(load_checkpoint(good.substr(0, cut)), CheckpointError) << cut;
  }
  EXPECT_THROW(load_checkpoint(good + "x"), CheckpointError);
}

TEST(Checkpoint, ShapeMismatchNamesTensor) {
  ParameterSet small = make_params(2, 1);
  ParameterSet big = make_params(3, 1);
  const Checkpoint ck = load_checkpoint(save_checkpoint(small, {}));
  try {
    restore_parameters(big, ck);
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("enc.W"), std::string::npos) << e.what();
  }
}

TEST(Checkpoint, UnknownNameIsError) {
  ParameterSet ps = make_params(2, 1);
  ps.add("extra", Tensor::Zero(1, 1));
  ParameterSet target = make_params(2, 1);
  EXPECT_THROW(restore_parameters(target, load_checkpoint(save_checkpoint(ps, {}))),
               CheckpointError);
}

TEST(Checkpoint, SkippedHeadRestoresBody) {
  ParameterSet src = make_params(2, 1);
  ParameterSet dst = make_params(2, 7);
  const auto head_before = dst.checksum("head.");
  restore_parameters(dst, load_checkpoint(save_checkpoint(src, {})),
                     [](std::string_view n) { return n.rfind("head.", 0) == 0; });
  EXPECT_EQ(dst.checksum("enc."), src.checksum("enc."));
  EXPECT_EQ(dst.checksum("head."), head_before);
}

}  // namespace
}  // namespace claimx
