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

#include <cmath>
#include <numbers>

#include "delib/error.h"
#include "delib/random.h"

namespace delib {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnbalancedBrackets: return "UnbalancedBrackets";
    case ErrorCode::kRootNotIntent: return "RootNotIntent";
    case ErrorCode::kIllegalNesting: return "IllegalNesting";
    case ErrorCode::kMalformedOntologyToken: return "MalformedOntologyToken";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kTargetTooSmall: return "TargetTooSmall";
    case ErrorCode::kUnknownOntologyToken: return "UnknownOntologyToken";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kHeadsDontDivide: return "HeadsDontDivide";
    case ErrorCode::kTargetOutOfRange: return "TargetOutOfRange";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kIdOutOfRange: return "IdOutOfRange";
    case ErrorCode::kEmptyAudio: return "EmptyAudio";
    case ErrorCode::kEmptyReference: return "EmptyReference";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kFractionOutOfRange: return "FractionOutOfRange";
    case ErrorCode::kBadRatios: return "BadRatios";
    case ErrorCode::kVocabMismatch: return "VocabMismatch";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kFormat: return "FormatError";
    case ErrorCode::kUsage: return "UsageError";
  }
  return "UnknownError";
}

uint64_t fnv1a(std::string_view bytes, uint64_t basis) {
  uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::normal() {
  // 1 - uniform() is in (0, 1], keeping the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace delib
