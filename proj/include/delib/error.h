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

#ifndef DELIB_ERROR_H_
#define DELIB_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace delib {

enum class ErrorCode {
  // parse_core
  kUnbalancedBrackets,
  kRootNotIntent,
  kIllegalNesting,
  kMalformedOntologyToken,
  kEmptyInput,
  // tokenizer
  kTargetTooSmall,
  kUnknownOntologyToken,
  // tensor engine
  kShapeMismatch,
  kHeadsDontDivide,
  kTargetOutOfRange,
  kNonFiniteValue,
  // asr stub
  kIdOutOfRange,
  kEmptyAudio,
  kEmptyReference,
  // model / training
  kLengthMismatch,
  kEmptyBatch,
  kNonFiniteLoss,
  // datagen
  kFractionOutOfRange,
  kBadRatios,
  // eval
  kVocabMismatch,
  // plumbing
  kIo,
  kFormat,
  kUsage,
};

std::string_view to_string(ErrorCode code);

// Every library failure is reported as an Error carrying one of the codes
// above; the message holds the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace delib

#endif  // DELIB_ERROR_H_
