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

#include "delib/record.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "delib/error.h"
#include "delib/parse.h"

namespace delib {

using nlohmann::json;

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

bool differs_after_normalization(const std::vector<std::string>& hyp,
                                 const std::vector<std::string>& ref) {
  return normalize(join_words(hyp)) != normalize(join_words(ref));
}

std::string to_json_line(const UtteranceRecord& r) {
  json audio = json::array();
  if (r.audio.defined()) {
    for (size_t t = 0; t < r.audio.rows(); ++t) {
      json frame = json::array();
      for (size_t f = 0; f < r.audio.cols(); ++f) frame.push_back(r.audio(t, f));
      audio.push_back(std::move(frame));
    }
  }
  json j;
  j["id"] = r.id;
  j["audio"] = std::move(audio);
  j["ref_text"] = join_words(r.reference_text);
  j["hyp_text"] = join_words(r.hypothesis_text);
  j["annotation"] = r.target_annotation;
  j["has_asr_error"] = r.has_asr_error;
  return j.dump();
}

UtteranceRecord from_json_line(std::string_view line) {
  UtteranceRecord r;
  try {
    const json j = json::parse(line);
    r.id = j.at("id").get<std::string>();
    const json& audio = j.at("audio");
    if (!audio.empty()) {
      const size_t frames = audio.size(), dim = audio.front().size();
      std::vector<double> values;
      values.reserve(frames * dim);
      for (const json& frame : audio) {
        if (frame.size() != dim) throw Error(ErrorCode::kFormat, "ragged audio in " + r.id);
        for (const json& v : frame) values.push_back(v.get<double>());
      }
      r.audio = Tensor(frames, dim, std::move(values));
    }
    r.reference_text = split_words(j.at("ref_text").get<std::string>());
    r.hypothesis_text = split_words(j.at("hyp_text").get<std::string>());
    r.target_annotation = j.at("annotation").get<std::string>();
    r.has_asr_error = j.at("has_asr_error").get<bool>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad record: ") + e.what());
  }
  return r;
}

void write_jsonl(const std::string& path, const std::vector<UtteranceRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  for (const UtteranceRecord& r : records) out << to_json_line(r) << '\n';
}

std::vector<UtteranceRecord> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<UtteranceRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(from_json_line(line));
  }
  return out;
}

size_t count_errors(const std::vector<UtteranceRecord>& records) {
  size_t n = 0;
  for (const UtteranceRecord& r : records) n += r.has_asr_error ? 1 : 0;
  return n;
}

}  // namespace delib
