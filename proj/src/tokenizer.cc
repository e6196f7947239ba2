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

#include "delib/tokenizer.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "delib/error.h"
#include "delib/parse.h"
#include "delib/random.h"

namespace delib {
namespace {

constexpr std::string_view kSpecialNames[Vocabulary::kNumSpecials] = {
    "<pad>", "<s>", "</s>", "<unk>"};

size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 1;
}

std::vector<std::string> split_chars(std::string_view word) {
  std::vector<std::string> chars;
  for (size_t i = 0; i < word.size();) {
    size_t n = std::min(utf8_length(static_cast<unsigned char>(word[i])),
                        word.size() - i);
    chars.emplace_back(word.substr(i, n));
    i += n;
  }
  return chars;
}

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) words.push_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

bool looks_like_ontology(std::string_view tok) {
  return tok == kCloseToken || tok.starts_with("[IN:") || tok.starts_with("[SL:");
}

}  // namespace

Vocabulary Vocabulary::build(std::span<const std::string> corpus,
                             size_t target_text_pieces,
                             std::span<const std::string> ontology_tokens) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyInput, "empty corpus");

  // Word types with counts; each word is a sequence of symbols. Brackets are
  // reserved for ontology tokens and never become text pieces.
  std::map<std::string, int64_t> word_counts;
  for (const std::string& line : corpus) {
    for (std::string_view w : split_words(line)) {
      std::string cleaned;
      for (char c : w) {
        if (c != '[' && c != ']') cleaned.push_back(c);
      }
      if (!cleaned.empty()) ++word_counts[std::string(kWordMarker) + cleaned];
    }
  }

  std::set<std::string> alphabet;
  std::vector<std::pair<std::vector<std::string>, int64_t>> words;
  for (const auto& [word, count] : word_counts) {
    auto chars = split_chars(word);
    alphabet.insert(chars.begin(), chars.end());
    words.emplace_back(std::move(chars), count);
  }
  if (target_text_pieces < alphabet.size()) {
    throw Error(ErrorCode::kTargetTooSmall,
                "target " + std::to_string(target_text_pieces) + " < " +
                    std::to_string(alphabet.size()) + " distinct characters");
  }

  std::vector<std::string> pieces(alphabet.begin(), alphabet.end());
  std::set<std::string> known(alphabet.begin(), alphabet.end());
  while (pieces.size() < target_text_pieces) {
    std::map<std::pair<std::string, std::string>, int64_t> pair_counts;
    for (const auto& [symbols, count] : words) {
      for (size_t i = 0; i + 1 < symbols.size(); ++i) {
        pair_counts[{symbols[i], symbols[i + 1]}] += count;
      }
    }
    if (pair_counts.empty()) break;
    // std::map iterates in lexicographic order, so the first maximum wins.
    auto best = pair_counts.begin();
    for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    const auto [left, right] = best->first;
    const std::string merged = left + right;
    for (auto& [symbols, count] : words) {
      std::vector<std::string> next;
      next.reserve(symbols.size());
      for (size_t i = 0; i < symbols.size(); ++i) {
        if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
          next.push_back(merged);
          ++i;
        } else {
          next.push_back(symbols[i]);
        }
      }
      symbols = std::move(next);
    }
    if (known.insert(merged).second) pieces.push_back(merged);
  }

  Vocabulary v;
  for (std::string_view s : kSpecialNames) v.tokens_.emplace_back(s);
  v.tokens_.insert(v.tokens_.end(), pieces.begin(), pieces.end());
  v.num_pieces_ = pieces.size();
  std::set<std::string> seen_onto;
  for (const std::string& tok : ontology_tokens) {
    if (!looks_like_ontology(tok)) {
      throw Error(ErrorCode::kMalformedOntologyToken, tok);
    }
    if (seen_onto.insert(tok).second) v.tokens_.push_back(tok);
  }
  v.index();
  return v;
}

Vocabulary Vocabulary::from_text(std::string_view text) {
  Vocabulary v;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) v.tokens_.push_back(line);
  if (v.tokens_.size() < kNumSpecials) {
    throw Error(ErrorCode::kFormat, "vocabulary has fewer than 4 entries");
  }
  for (int i = 0; i < kNumSpecials; ++i) {
    if (v.tokens_[static_cast<size_t>(i)] != kSpecialNames[i]) {
      throw Error(ErrorCode::kFormat, "line " + std::to_string(i) +
                                          " must be " + std::string(kSpecialNames[i]));
    }
  }
  size_t i = kNumSpecials;
  while (i < v.tokens_.size() && !looks_like_ontology(v.tokens_[i])) ++i;
  v.num_pieces_ = i - kNumSpecials;
  for (; i < v.tokens_.size(); ++i) {
    if (!looks_like_ontology(v.tokens_[i])) {
      throw Error(ErrorCode::kFormat,
                  "text piece '" + v.tokens_[i] + "' after ontology tokens");
    }
  }
  v.index();
  return v;
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

std::string Vocabulary::to_text() const {
  std::string out;
  for (const std::string& t : tokens_) {
    out += t;
    out.push_back('\n');
  }
  return out;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << to_text();
}

void Vocabulary::index() {
  ids_.clear();
  max_piece_bytes_ = 0;
  for (size_t i = 0; i < tokens_.size(); ++i) {
    ids_.emplace(tokens_[i], static_cast<int>(i));
    if (is_text_piece(static_cast<int>(i))) {
      max_piece_bytes_ = std::max(max_piece_bytes_, tokens_[i].size());
    }
  }
}

int Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? -1 : it->second;
}

std::vector<int> Vocabulary::encode_word(std::string_view word) const {
  const std::string marked = std::string(kWordMarker) + std::string(word);
  // Byte offsets of character boundaries.
  std::vector<size_t> bounds{0};
  for (size_t i = 0; i < marked.size();) {
    i += std::min(utf8_length(static_cast<unsigned char>(marked[i])), marked.size() - i);
    bounds.push_back(i);
  }
  std::vector<int> ids;
  size_t start = 0;
  while (start + 1 < bounds.size()) {
    int found = -1;
    size_t found_end = start + 1;
    for (size_t end = bounds.size() - 1; end > start; --end) {
      const size_t bytes = bounds[end] - bounds[start];
      if (bytes > max_piece_bytes_) continue;
      const int piece = id(std::string_view(marked).substr(bounds[start], bytes));
      if (piece >= 0 && is_text_piece(piece)) {
        found = piece;
        found_end = end;
        break;
      }
    }
    ids.push_back(found >= 0 ? found : kUnk);
    start = found_end;
  }
  return ids;
}

std::vector<int> Vocabulary::encode(std::string_view text) const {
  std::vector<int> ids;
  for (std::string_view w : split_words(text)) {
    auto piece_ids = encode_word(w);
    ids.insert(ids.end(), piece_ids.begin(), piece_ids.end());
  }
  return ids;
}

std::string Vocabulary::decode(std::span<const int> ids) const {
  std::string out;
  for (int i : ids) {
    if (i < 0 || static_cast<size_t>(i) >= tokens_.size()) {
      out += std::string(kSpecialNames[kUnk]);
      continue;
    }
    if (i == kUnk) {
      out += std::string(kSpecialNames[kUnk]);
    } else if (is_special(i)) {
      continue;
    } else if (is_ontology(i)) {
      out += ' ';
      out += tokens_[static_cast<size_t>(i)];
      out += ' ';
    } else {
      const std::string& piece = tokens_[static_cast<size_t>(i)];
      if (piece.starts_with(kWordMarker)) {
        out += ' ';
        out += piece.substr(kWordMarker.size());
      } else {
        out += piece;
      }
    }
  }
  // Collapse the spacing introduced above.
  std::string collapsed;
  for (std::string_view w : split_words(out)) {
    if (!collapsed.empty()) collapsed.push_back(' ');
    collapsed += w;
  }
  return collapsed;
}

std::vector<int> Vocabulary::encode_annotation(std::string_view annotation) const {
  std::vector<int> ids{kBos};
  for (const std::string& tok : lex_annotation(annotation)) {
    if (looks_like_ontology(tok) || tok.starts_with("[")) {
      const int i = id(tok);
      if (i < 0 || !is_ontology(i)) {
        throw Error(ErrorCode::kUnknownOntologyToken, tok);
      }
      ids.push_back(i);
    } else {
      const std::string word = normalize(tok);
      if (word.empty()) continue;
      auto piece_ids = encode_word(word);
      ids.insert(ids.end(), piece_ids.begin(), piece_ids.end());
    }
  }
  ids.push_back(kEos);
  return ids;
}

std::string Vocabulary::decode_annotation(std::span<const int> ids) const {
  return decode(ids);
}

uint64_t Vocabulary::digest() const { return fnv1a(to_text()); }

}  // namespace delib
