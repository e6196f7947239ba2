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

// Bracketed task-oriented parses such as
//
//   [IN:DIRECTION [SL:DESTINATION [IN:EVENT [SL:NAME eagles ] ] ] ]
//
// An intent opens with "[IN:<LABEL>", a slot with "[SL:<LABEL>", and every
// node closes with "]". Labels are uppercase identifiers; text tokens are
// single words.

#ifndef DELIB_PARSE_H_
#define DELIB_PARSE_H_

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace delib {

enum class SymbolKind { kIntent, kSlot };

struct OntologySymbol {
  SymbolKind kind = SymbolKind::kIntent;
  std::string label;

  // "[IN:LABEL" or "[SL:LABEL".
  std::string open_token() const;

  // Throws kMalformedOntologyToken unless `token` is a well-formed opener.
  static OntologySymbol from_token(std::string_view token);

  bool operator==(const OntologySymbol&) const = default;
};

inline constexpr std::string_view kCloseToken = "]";

struct ParseNode {
  OntologySymbol symbol;
  // Each child is either a text word or a nested node.
  std::vector<std::variant<std::string, ParseNode>> children;

  // Number of nodes on the longest root-to-node path (text excluded).
  int depth() const;
  bool is_compositional() const;
};

bool operator==(const ParseNode& a, const ParseNode& b);

// Splits an annotation into tokens: ontology openers, "]" and words. Whitespace
// before and after brackets is optional. Never throws.
std::vector<std::string> lex_annotation(std::string_view s);

// Throws Error with kEmptyInput, kUnbalancedBrackets, kRootNotIntent,
// kIllegalNesting or kMalformedOntologyToken.
ParseNode parse_annotation(std::string_view s);

// Single-space separated linearization; always emits a space before "]".
std::string serialize(const ParseNode& tree);
std::vector<std::string> linearize(const ParseNode& tree);

// Lowercases text words, strips the characters .,!?;:'" from them and joins
// all tokens with single spaces. Ontology tokens are left untouched.
std::string normalize(std::string_view s);

bool exact_match(std::string_view hyp, std::string_view ref);

// Mean exact match over (hypothesis, reference) pairs; kEmptyInput if empty.
double em_score(std::span<const std::pair<std::string, std::string>> pairs);

// Every ontology opener appearing in the tree, in preorder.
void collect_ontology_tokens(const ParseNode& tree,
                             std::vector<std::string>& out);

// Text words of the tree in order (the slot contents).
std::vector<std::string> text_words(const ParseNode& tree);

}  // namespace delib

#endif  // DELIB_PARSE_H_
