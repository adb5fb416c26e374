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

#include "claimx/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace claimx {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw CheckpointError(std::string("truncated checkpoint while reading ") + what +
                            " at byte " + std::to_string(pos_));
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const NamedTensor* Checkpoint::find(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string save_checkpoint(const ParameterSet& params, const nlohmann::json& metadata) {
  std::string out(kCheckpointMagic);
  put<std::uint8_t>(out, kCheckpointVersion);
  const std::string meta = metadata.dump();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(meta.size()));
  out += meta;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    if (p->name.size() > 0xffff) throw CheckpointError("parameter name too long: " + p->name);
    put<std::uint16_t>(out, static_cast<std::uint16_t>(p->name.size()));
    out += p->name;
    put<std::uint8_t>(out, 2);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.cols()));
    out.append(reinterpret_cast<const char*>(p->value.data()),
               sizeof(double) * static_cast<std::size_t>(p->value.size()));
  }
  return out;
}

Checkpoint load_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kCheckpointMagic.size(), "magic") != kCheckpointMagic) {
    throw CheckpointError("not a checkpoint: bad magic bytes");
  }
  const auto version = in.get<std::uint8_t>("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) +
                          " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ckpt;
  const auto meta_len = in.get<std::uint32_t>("metadata length");
  const std::string_view meta = in.take(meta_len, "metadata");
  try {
    ckpt.metadata = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint metadata: ") + e.what());
  }
  const auto count = in.get<std::uint32_t>("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const auto name_len = in.get<std::uint16_t>("tensor name length");
    t.name = std::string(in.take(name_len, "tensor name"));
    const auto rank = in.get<std::uint8_t>("tensor rank");
    if (rank < 1 || rank > 2) {
      throw CheckpointError("tensor " + t.name + " has unsupported rank " +
                            std::to_string(rank));
    }
    std::size_t n = 1;
    for (int d = 0; d < rank; ++d) {
      t.shape.push_back(in.get<std::uint32_t>("tensor shape"));
      n *= t.shape.back();
    }
    const Eigen::Index rows = t.shape[0];
    const Eigen::Index cols = rank == 2 ? t.shape[1] : 1;
    t.value.resize(rows, cols);
    const std::string_view raw = in.take(n * sizeof(double), "tensor values");
    std::memcpy(t.value.data(), raw.data(), raw.size());
    if (ckpt.find(t.name) != nullptr) {
      throw CheckpointError("duplicate tensor name in checkpoint: " + t.name);
    }
    ckpt.tensors.push_back(std::move(t));
  }
  if (!in.done()) throw CheckpointError("trailing bytes after last tensor");
  return ckpt;
}

void restore_parameters(ParameterSet& params, const Checkpoint& ckpt,
                        const std::function<bool(std::string_view)>& skip) {
  auto skipped = [&](std::string_view name) { return skip && skip(name); };
  for (const auto& t : ckpt.tensors) {
    if (skipped(t.name)) continue;
    Parameter* p = params.find(t.name);
    if (p == nullptr) throw CheckpointError("unknown parameter name in checkpoint: " + t.name);
    if (p->value.rows() != t.value.rows() || p->value.cols() != t.value.cols()) {
      std::ostringstream msg;
      msg << "shape mismatch for tensor " << t.name << ": checkpoint "
          << t.value.rows() << "x" << t.value.cols() << ", model "
          << p->value.rows() << "x" << p->value.cols();
      throw CheckpointError(msg.str());
    }
  }
  for (const auto& p : params) {
    if (skipped(p->name)) continue;
    if (ckpt.find(p->name) == nullptr) {
      throw CheckpointError("checkpoint is missing tensor " + p->name);
    }
  }
  for (const auto& t : ckpt.tensors) {
    if (skipped(t.name)) continue;
    params.at(t.name).value = t.value;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace claimx
