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

#include "delib/parse.h"

#include <algorithm>
#include <cctype>

#include "delib/error.h"

namespace delib {
namespace {

constexpr std::string_view kPunctuation = ".,!?;:'\"";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

bool is_label_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_open_token(std::string_view tok) {
  return !tok.empty() && tok.front() == '[';
}

void append_tokens(const ParseNode& node, std::vector<std::string>& out) {
  out.push_back(node.symbol.open_token());
  for (const auto& child : node.children) {
    if (const auto* word = std::get_if<std::string>(&child)) {
      out.push_back(*word);
    } else {
      append_tokens(std::get<ParseNode>(child), out);
    }
  }
  out.emplace_back(kCloseToken);
}

}  // namespace

std::string OntologySymbol::open_token() const {
  return (kind == SymbolKind::kIntent ? "[IN:" : "[SL:") + label;
}

OntologySymbol OntologySymbol::from_token(std::string_view token) {
  OntologySymbol sym;
  if (token.starts_with("[IN:")) {
    sym.kind = SymbolKind::kIntent;
  } else if (token.starts_with("[SL:")) {
    sym.kind = SymbolKind::kSlot;
  } else {
    throw Error(ErrorCode::kMalformedOntologyToken, std::string(token));
  }
  std::string_view label = token.substr(4);
  if (label.empty() || !std::all_of(label.begin(), label.end(), is_label_char)) {
    throw Error(ErrorCode::kMalformedOntologyToken, std::string(token));
  }
  sym.label = std::string(label);
  return sym;
}

int ParseNode::depth() const {
  int best = 0;
  for (const auto& child : children) {
    if (const auto* node = std::get_if<ParseNode>(&child)) {
      best = std::max(best, node->depth());
    }
  }
  return best + 1;
}

bool ParseNode::is_compositional() const {
  // intent -> slot -> intent
  return depth() > 2;
}

bool operator==(const ParseNode& a, const ParseNode& b) {
  return a.symbol == b.symbol && a.children == b.children;
}

std::vector<std::string> lex_annotation(std::string_view s) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < s.size()) {
    if (is_space(s[i])) {
      ++i;
    } else if (s[i] == ']') {
      tokens.emplace_back(kCloseToken);
      ++i;
    } else {
      // An opener or a word runs until whitespace or the next bracket; a
      // leading '[' belongs to the token itself.
      size_t j = i + 1;
      while (j < s.size() && !is_space(s[j]) && s[j] != '[' && s[j] != ']') {
        ++j;
      }
      tokens.emplace_back(s.substr(i, j - i));
      i = j;
    }
  }
  return tokens;
}

ParseNode parse_annotation(std::string_view s) {
  const std::vector<std::string> tokens = lex_annotation(s);
  if (tokens.empty()) throw Error(ErrorCode::kEmptyInput, "empty annotation");

  if (!is_open_token(tokens.front())) {
    throw Error(ErrorCode::kRootNotIntent,
                "annotation must start with an intent, got '" +
                    tokens.front() + "'");
  }

  // Nodes under construction; the root is stack[0].
  std::vector<ParseNode> stack;
  bool closed_root = false;
  ParseNode root;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (closed_root) {
      throw Error(ErrorCode::kUnbalancedBrackets,
                  "token '" + tok + "' after the root node closed");
    }
    if (tok == kCloseToken) {
      if (stack.empty()) {
        throw Error(ErrorCode::kUnbalancedBrackets, "unmatched ']'");
      }
      ParseNode done = std::move(stack.back());
      stack.pop_back();
      if (stack.empty()) {
        root = std::move(done);
        closed_root = true;
      } else {
        stack.back().children.emplace_back(std::move(done));
      }
    } else if (is_open_token(tok)) {
      OntologySymbol sym = OntologySymbol::from_token(tok);
      if (stack.empty()) {
        if (sym.kind != SymbolKind::kIntent) {
          throw Error(ErrorCode::kRootNotIntent, "root is " + tok);
        }
      } else if (stack.back().symbol.kind == sym.kind) {
        throw Error(ErrorCode::kIllegalNesting,
                    tok + " directly under " + stack.back().symbol.open_token());
      }
      stack.push_back(ParseNode{std::move(sym), {}});
    } else {
      stack.back().children.emplace_back(tok);
    }
  }
  if (!closed_root) {
    throw Error(ErrorCode::kUnbalancedBrackets,
                std::to_string(stack.size()) + " unclosed node(s)");
  }
  return root;
}

std::vector<std::string> linearize(const ParseNode& tree) {
  std::vector<std::string> out;
  append_tokens(tree, out);
  return out;
}

std::string serialize(const ParseNode& tree) {
  std::string out;
  for (const std::string& tok : linearize(tree)) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

std::string normalize(std::string_view s) {
  std::string out;
  for (const std::string& tok : lex_annotation(s)) {
    std::string norm;
    if (is_open_token(tok) || tok == kCloseToken) {
      norm = tok;
    } else {
      for (char c : tok) {
        if (kPunctuation.find(c) != std::string_view::npos) continue;
        norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
      if (norm.empty()) continue;
    }
    if (!out.empty()) out.push_back(' ');
    out += norm;
  }
  return out;
}

bool exact_match(std::string_view hyp, std::string_view ref) {
  return normalize(hyp) == normalize(ref);
}

double em_score(std::span<const std::pair<std::string, std::string>> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "no pairs to score");
  size_t hits = 0;
  for (const auto& [hyp, ref] : pairs) hits += exact_match(hyp, ref) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

void collect_ontology_tokens(const ParseNode& tree,
                             std::vector<std::string>& out) {
  out.push_back(tree.symbol.open_token());
  for (const auto& child : tree.children) {
    if (const auto* node = std::get_if<ParseNode>(&child)) {
      collect_ontology_tokens(*node, out);
    }
  }
}

std::vector<std::string> text_words(const ParseNode& tree) {
  std::vector<std::string> words;
  for (const std::string& tok : linearize(tree)) {
    if (!is_open_token(tok) && tok != kCloseToken) words.push_back(tok);
  }
  return words;
}

}  // namespace delib
