// Copyright 2026 The DelibSLU Authors.
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

#include "delib/checkpoint.h"

#include <bit>
#include <fstream>
#include <sstream>

#include "delib/error.h"

namespace delib {
namespace {

constexpr char kMagic[4] = {'D', 'L', 'S', 'U'};

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  uint32_t u32() { return static_cast<uint32_t>(take(4)); }
  uint64_t u64() { return take(8); }
  std::string str(size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error(ErrorCode::kFormat, "truncated checkpoint");
  }
  uint64_t take(int n) {
    need(static_cast<size_t>(n));
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<size_t>(i)]))
           << (8 * i);
    }
    pos_ += static_cast<size_t>(n);
    return v;
  }

  const std::string& bytes_;
  size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const ParameterSet& params, uint64_t vocab_digest) {
  std::string out(kMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u64(out, vocab_digest);
  put_u32(out, static_cast<uint32_t>(params.entries().size()));
  for (const auto& [name, t] : params.entries()) {
    put_u32(out, static_cast<uint32_t>(name.size()));
    out += name;
    put_u32(out, 2);
    put_u32(out, static_cast<uint32_t>(t.rows()));
    put_u32(out, static_cast<uint32_t>(t.cols()));
    for (double v : t.values()) put_u32(out, std::bit_cast<uint32_t>(static_cast<float>(v)));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  if (in.str(4) != std::string(kMagic, 4)) throw Error(ErrorCode::kFormat, "bad checkpoint magic");
  Checkpoint ckpt;
  ckpt.version = in.u32();
  if (ckpt.version != kCheckpointVersion) {
    throw Error(ErrorCode::kFormat, "unsupported checkpoint version " + std::to_string(ckpt.version));
  }
  ckpt.vocab_digest = in.u64();
  const uint32_t count = in.u32();
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = in.str(in.u32());
    const uint32_t rank = in.u32();
    if (rank == 0 || rank > 2) throw Error(ErrorCode::kFormat, "rank " + std::to_string(rank));
    size_t dims[2] = {1, 1};
    for (uint32_t r = 0; r < rank; ++r) dims[2 - rank + r] = in.u32();
    std::vector<double> values(dims[0] * dims[1]);
    for (double& v : values) v = static_cast<double>(std::bit_cast<float>(in.u32()));
    ckpt.tensors.push_back({std::move(name), Tensor(dims[0], dims[1], std::move(values))});
  }
  if (!in.done()) throw Error(ErrorCode::kFormat, "trailing bytes in checkpoint");
  return ckpt;
}

void save_checkpoint(const std::string& path, const ParameterSet& params, uint64_t vocab_digest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << encode_checkpoint(params, vocab_digest);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

void restore_parameters(const Checkpoint& ckpt, ParameterSet& params) {
  for (const auto& [name, target] : params.entries()) {
    const NamedTensor* found = nullptr;
    for (const auto& t : ckpt.tensors) {
      if (t.name == name) found = &t;
    }
    if (found == nullptr) throw Error(ErrorCode::kFormat, "checkpoint lacks " + name);
    if (found->tensor.shape() != target.shape()) {
      throw Error(ErrorCode::kFormat, name + ": checkpoint " + found->tensor.shape_string() +
                                          " vs model " + target.shape_string());
    }
    Tensor dst = target;
    auto src = found->tensor.values();
    std::copy(src.begin(), src.end(), dst.mutable_values().begin());
  }
}

}  // namespace delib
