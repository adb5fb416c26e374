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

#ifndef CLAIMX_CHECKPOINT_HPP_
#define CLAIMX_CHECKPOINT_HPP_

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "claimx/tensor.hpp"
#include "json.hpp"

namespace claimx {

// Binary layout (all integers little-endian), see docs/checkpoint_format.md:
//   "CLMXCKPT" | u8 version | u32 meta_len | meta JSON | u32 count |
//   count x { u16 name_len | name | u8 rank | rank x u32 dim | f64 values }
inline constexpr std::string_view kCheckpointMagic = "CLMXCKPT";
inline constexpr std::uint8_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> shape;
  Tensor value;
};

struct Checkpoint {
  nlohmann::json metadata;
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(std::string_view name) const;
};

std::string save_checkpoint(const ParameterSet& params, const nlohmann::json& metadata);
Checkpoint load_checkpoint(std::string_view bytes);

// Copies checkpoint tensors into same-named parameters. Entries for which
// `skip(name)` is true are ignored; every other checkpoint tensor must name an
// existing parameter of identical shape, and every non-skipped parameter must
// be present in the checkpoint.
void restore_parameters(ParameterSet& params, const Checkpoint& ckpt,
                        const std::function<bool(std::string_view)>& skip = {});

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace claimx

#endif  // CLAIMX_CHECKPOINT_HPP_
