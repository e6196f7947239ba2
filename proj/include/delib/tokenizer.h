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

#ifndef DELIB_TOKENIZER_H_
#define DELIB_TOKENIZER_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace delib {

// Joint id space shared by the text encoder input and the decoder output:
//
//   [0, 4)                      specials  <pad> <s> </s> <unk>
//   [4, 4 + P)                  text pieces
//   [4 + P, 4 + P + O)          ontology tokens ("[IN:*", "[SL:*", "]")
//
// Text pieces are subwords. A piece that starts a word carries the marker
// U+2581 ("▁"), so "play jacques" encodes as e.g. ▁play ▁jac ques.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kNumSpecials = 4;
  static constexpr std::string_view kWordMarker = "\xe2\x96\x81";

  Vocabulary() = default;

  // Byte-pair style build: every character seen in the corpus becomes a
  // piece, then the most frequent adjacent pair inside a word is merged
  // (ties broken by the lexicographically smallest pair) until the piece
  // count reaches `target_text_pieces` or nothing is left to merge.
  // Throws kTargetTooSmall when the target is below the alphabet size.
  static Vocabulary build(std::span<const std::string> corpus,
                          size_t target_text_pieces,
                          std::span<const std::string> ontology_tokens);

  // One token per line, line number = id.
  static Vocabulary from_text(std::string_view text);
  static Vocabulary load(const std::string& path);
  std::string to_text() const;
  void save(const std::string& path) const;

  size_t size() const { return tokens_.size(); }
  size_t num_text_pieces() const { return num_pieces_; }
  size_t num_ontology_tokens() const {
    return tokens_.size() - kNumSpecials - num_pieces_;
  }
  // Output units excluding specials.
  size_t num_output_units() const { return num_pieces_ + num_ontology_tokens(); }

  bool is_special(int id) const { return id >= 0 && id < kNumSpecials; }
  bool is_text_piece(int id) const {
    return id >= kNumSpecials && id < kNumSpecials + static_cast<int>(num_pieces_);
  }
  bool is_ontology(int id) const {
    return id >= kNumSpecials + static_cast<int>(num_pieces_) &&
           id < static_cast<int>(tokens_.size());
  }

  const std::string& token(int id) const { return tokens_.at(static_cast<size_t>(id)); }
  std::span<const std::string> tokens() const { return tokens_; }
  // -1 when absent.
  int id(std::string_view token) const;

  // Greedy longest match per whitespace word; unknown characters map to UNK.
  std::vector<int> encode(std::string_view text) const;
  std::vector<int> encode_word(std::string_view word) const;
  std::string decode(std::span<const int> ids) const;

  // <s> ... </s> around the annotation tokens. Text words are normalized
  // before encoding. Throws kUnknownOntologyToken.
  std::vector<int> encode_annotation(std::string_view annotation) const;
  // Specials are dropped; the result is single-space separated.
  std::string decode_annotation(std::span<const int> ids) const;

  // FNV-1a over to_text().
  uint64_t digest() const;

 private:
  void index();

  std::vector<std::string> tokens_;
  size_t num_pieces_ = 0;
  size_t max_piece_bytes_ = 0;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace delib

#endif  // DELIB_TOKENIZER_H_
