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

#ifndef DELIB_RECORD_H_
#define DELIB_RECORD_H_

#include <string>
#include <string_view>
#include <vector>

#include "delib/tensor.h"

namespace delib {

struct UtteranceRecord {
  std::string id;
  Tensor audio;  // frames x F raw features
  std::vector<std::string> reference_text;
  std::vector<std::string> hypothesis_text;
  std::string target_annotation;
  bool has_asr_error = false;
};

std::string join_words(const std::vector<std::string>& words);
std::vector<std::string> split_words(std::string_view text);

// True when the normalized hypothesis differs from the normalized reference.
bool differs_after_normalization(const std::vector<std::string>& hyp,
                                 const std::vector<std::string>& ref);

// One JSON object per line: id, audio (array of frames), ref_text, hyp_text,
// annotation, has_asr_error.
std::string to_json_line(const UtteranceRecord& r);
UtteranceRecord from_json_line(std::string_view line);

void write_jsonl(const std::string& path, const std::vector<UtteranceRecord>& records);
std::vector<UtteranceRecord> read_jsonl(const std::string& path);

size_t count_errors(const std::vector<UtteranceRecord>& records);

}  // namespace delib

#endif  // DELIB_RECORD_H_
