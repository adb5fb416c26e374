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

#ifndef CLAIMX_CLI_HPP_
#define CLAIMX_CLI_HPP_

#include <iosfwd>

namespace claimx {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point for the `claimx` tool. Subcommands: pretrain, transfer, train,
// eval, predict, serve, stats, vote. Logs go to `err`; primary results that
// are printed go to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace claimx

#endif  // CLAIMX_CLI_HPP_
