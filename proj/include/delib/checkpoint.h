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

// Binary parameter container. All integers are little-endian.
//
//   magic      4 bytes  "DLSU"
//   version    u32      kCheckpointVersion
//   vocab      u64      digest of the vocabulary the model was trained with
//   count      u32      number of tensors
//   count times:
//     name_len u32, name bytes, rank u32, rank x u32 dims,
//     prod(dims) x float32 values

#ifndef DELIB_CHECKPOINT_H_
#define DELIB_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "delib/nn.h"

namespace delib {

inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  uint32_t version = kCheckpointVersion;
  uint64_t vocab_digest = 0;
  std::vector<NamedTensor> tensors;
};

std::string encode_checkpoint(const ParameterSet& params, uint64_t vocab_digest);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const ParameterSet& params, uint64_t vocab_digest);
Checkpoint load_checkpoint(const std::string& path);

// Copies values by name into `params`; every parameter must be present with
// a matching shape (kFormat otherwise).
void restore_parameters(const Checkpoint& ckpt, ParameterSet& params);

}  // namespace delib

#endif  // DELIB_CHECKPOINT_H_
