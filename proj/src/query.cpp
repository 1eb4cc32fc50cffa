// Copyright 2026 The provabs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "provabs/query.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace provabs {

namespace {

struct Token {
  enum Kind { Ident, Quoted, LParen, RParen, Comma, Turnstile, End } kind;
  std::string text;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_space_and_comments();
    if (pos_ >= text_.size()) return {Token::End, "", pos_};
    std::size_t start = pos_;
    char c = text_[pos_];
    if (c == '(') { ++pos_; return {Token::LParen, "(", start}; }
    if (c == ')') { ++pos_; return {Token::RParen, ")", start}; }
    if (c == ',') { ++pos_; return {Token::Comma, ",", start}; }
    if (c == ':') {
      if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
        pos_ += 2;
        return {Token::Turnstile, ":-", start};
      }
      fail("expected ':-'", start);
    }
    if (c == '\'') return quoted(start);
    if (is_ident_start(c)) {
      std::size_t end = pos_;
      while (end < text_.size() && is_ident_char(text_[end])) ++end;
      Token t{Token::Ident, std::string(text_.substr(pos_, end - pos_)), start};
      pos_ = end;
      return t;
    }
    fail(std::string("unexpected character '") + c + "'", start);
    return {};
  }

  [[noreturn]] void fail(const std::string& message, std::size_t pos) const {
    throw Error(ErrorKind::Parse,
                "query parse error at position " + std::to_string(pos) + ": " + message);
  }

 private:
  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos_;
      } else if (c == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Token quoted(std::size_t start) {
    ++pos_;  // opening quote
    std::string value;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\\' && pos_ + 1 < text_.size()) {
        value.push_back(text_[pos_ + 1]);
        pos_ += 2;
        continue;
      }
      if (c == '\'') {
        ++pos_;
        return {Token::Quoted, value, start};
      }
      value.push_back(c);
      ++pos_;
    }
    fail("unterminated string constant", start);
    return {};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { advance(); }

  ConjunctiveQuery parse() {
    ConjunctiveQuery query;
    Token name = expect(Token::Ident, "head relation name");
    query.head_relation = name.text;
    query.head = term_list();
    expect(Token::Turnstile, "':-'");
    query.body.push_back(atom());
    while (current_.kind == Token::Comma) {
      advance();
      query.body.push_back(atom());
    }
    if (current_.kind != Token::End) {
      lexer_.fail("trailing input after query body", current_.pos);
    }
    query.validate();
    return query;
  }

 private:
  Atom atom() {
    Token name = expect(Token::Ident, "relation name");
    Atom a;
    a.relation = name.text;
    a.terms = term_list();
    return a;
  }

  std::vector<Term> term_list() {
    expect(Token::LParen, "'('");
    std::vector<Term> terms;
    terms.push_back(term());
    while (current_.kind == Token::Comma) {
      advance();
      terms.push_back(term());
    }
    expect(Token::RParen, "')'");
    return terms;
  }

  Term term() {
    if (current_.kind == Token::Ident) {
      Term t = Term::variable(current_.text);
      advance();
      return t;
    }
    if (current_.kind == Token::Quoted) {
      Term t = Term::constant(current_.text);
      advance();
      return t;
    }
    lexer_.fail("expected a variable or quoted constant", current_.pos);
    return {};
  }

  Token expect(Token::Kind kind, const std::string& what) {
    if (current_.kind != kind) lexer_.fail("expected " + what, current_.pos);
    Token t = current_;
    advance();
    return t;
  }

  void advance() { current_ = lexer_.next(); }

  Lexer lexer_;
  Token current_;
};

std::string quote_constant(const std::string& value) {
  std::string out = "'";
  for (char c : value) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

std::string print_term(const Term& t) {
  return t.is_variable ? t.text : quote_constant(t.text);
}

// Backtracking derivation enumeration over the body atoms in order.
void enumerate_derivations(const ConjunctiveQuery& query, const KDatabase& db,
                           std::size_t atom_index, std::map<std::string, std::string>& binding,
                           std::vector<const AnnotatedTuple*>& matched,
                           std::map<std::vector<std::string>, Polynomial>& out) {
  if (atom_index == query.body.size()) {
    std::vector<std::string> output;
    output.reserve(query.head.size());
    for (const Term& t : query.head) {
      output.push_back(t.is_variable ? binding.at(t.text) : t.text);
    }
    Monomial m;
    for (const AnnotatedTuple* tuple : matched) m.multiply(tuple->annotation);
    out[output].add(m);
    return;
  }
  const Atom& atom = query.body[atom_index];
  auto it = db.tuples.find(atom.relation);
  if (it == db.tuples.end()) return;
  for (const AnnotatedTuple& tuple : it->second) {
    std::vector<std::pair<std::string, std::string>> bound_here;
    bool ok = true;
    for (std::size_t i = 0; i < atom.terms.size() && ok; ++i) {
      const Term& t = atom.terms[i];
      const std::string& value = tuple.values[i];
      if (!t.is_variable) {
        ok = (t.text == value);
        continue;
      }
      auto bit = binding.find(t.text);
      if (bit == binding.end()) {
        binding.emplace(t.text, value);
        bound_here.emplace_back(t.text, value);
      } else {
        ok = (bit->second == value);
      }
    }
    if (ok) {
      matched.push_back(&tuple);
      enumerate_derivations(query, db, atom_index + 1, binding, matched, out);
      matched.pop_back();
    }
    for (const auto& [name, value] : bound_here) {
      (void)value;
      binding.erase(name);
    }
  }
}

// Homomorphism search from `outer` into `inner` under a partial variable
// binding seeded by the head. Atoms are visited in (relation, position) order.
bool find_homomorphism(const ConjunctiveQuery& outer, const ConjunctiveQuery& inner,
                       const std::vector<std::size_t>& order, std::size_t step,
                       std::map<std::string, Term>& binding) {
  if (step == order.size()) return true;
  const Atom& atom = outer.body[order[step]];
  for (const Atom& target : inner.body) {
    if (target.relation != atom.relation || target.terms.size() != atom.terms.size()) continue;
    std::vector<std::string> bound_here;
    bool ok = true;
    for (std::size_t i = 0; i < atom.terms.size() && ok; ++i) {
      const Term& t = atom.terms[i];
      const Term& u = target.terms[i];
      if (!t.is_variable) {
        ok = (!u.is_variable && u.text == t.text);
        continue;
      }
      auto bit = binding.find(t.text);
      if (bit == binding.end()) {
        binding.emplace(t.text, u);
        bound_here.push_back(t.text);
      } else {
        ok = (bit->second == u);
      }
    }
    if (ok && find_homomorphism(outer, inner, order, step + 1, binding)) return true;
    for (const std::string& name : bound_here) binding.erase(name);
  }
  return false;
}

}  // namespace

int ConjunctiveQuery::variable_count() const {
  std::set<std::string> vars;
  for (const Term& t : head) {
    if (t.is_variable) vars.insert(t.text);
  }
  for (const Atom& a : body) {
    for (const Term& t : a.terms) {
      if (t.is_variable) vars.insert(t.text);
    }
  }
  return static_cast<int>(vars.size());
}

void ConjunctiveQuery::validate() const {
  if (body.empty()) {
    throw Error(ErrorKind::Parse, "query body must contain at least one atom");
  }
  std::set<std::string> body_vars;
  for (const Atom& a : body) {
    for (const Term& t : a.terms) {
      if (t.is_variable) body_vars.insert(t.text);
    }
  }
  for (const Term& t : head) {
    if (t.is_variable && body_vars.find(t.text) == body_vars.end()) {
      throw Error(ErrorKind::Parse, "head variable '" + t.text + "' does not occur in the body");
    }
  }
}

ConjunctiveQuery parse_query(std::string_view text) { return Parser(text).parse(); }

std::string print_query(const ConjunctiveQuery& query) {
  std::ostringstream out;
  out << query.head_relation << "(";
  for (std::size_t i = 0; i < query.head.size(); ++i) {
    if (i > 0) out << ",";
    out << print_term(query.head[i]);
  }
  out << ") :- ";
  for (std::size_t i = 0; i < query.body.size(); ++i) {
    if (i > 0) out << ", ";
    out << query.body[i].relation << "(";
    for (std::size_t j = 0; j < query.body[i].terms.size(); ++j) {
      if (j > 0) out << ",";
      out << print_term(query.body[i].terms[j]);
    }
    out << ")";
  }
  return out.str();
}

std::map<std::vector<std::string>, Polynomial> evaluate(const ConjunctiveQuery& query,
                                                        const KDatabase& db) {
  query.validate();
  for (const Atom& atom : query.body) {
    const RelationSchema* schema = db.schema(atom.relation);
    if (schema == nullptr) {
      throw Error(ErrorKind::SchemaMismatch, "unknown relation '" + atom.relation + "'");
    }
    if (schema->arity() != atom.terms.size()) {
      throw Error(ErrorKind::SchemaMismatch,
                  "atom over '" + atom.relation + "' has arity " +
                      std::to_string(atom.terms.size()) + ", schema says " +
                      std::to_string(schema->arity()));
    }
  }
  std::map<std::vector<std::string>, Polynomial> out;
  std::map<std::string, std::string> binding;
  std::vector<const AnnotatedTuple*> matched;
  enumerate_derivations(query, db, 0, binding, matched, out);
  return out;
}

std::vector<std::pair<int, int>> join_graph_edges(const ConjunctiveQuery& query) {
  std::vector<std::set<std::string>> vars(query.body.size());
  for (std::size_t i = 0; i < query.body.size(); ++i) {
    for (const Term& t : query.body[i].terms) {
      if (t.is_variable) vars[i].insert(t.text);
    }
  }
  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 0; i < query.body.size(); ++i) {
    for (std::size_t j = i + 1; j < query.body.size(); ++j) {
      bool shares = std::any_of(vars[i].begin(), vars[i].end(), [&](const std::string& v) {
        return vars[j].find(v) != vars[j].end();
      });
      if (shares) edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return edges;
}

bool is_connected_query(const ConjunctiveQuery& query) {
  if (query.body.size() <= 1) return true;
  std::vector<std::vector<int>> adjacent(query.body.size());
  for (const auto& [a, b] : join_graph_edges(query)) {
    adjacent[a].push_back(b);
    adjacent[b].push_back(a);
  }
  std::vector<bool> seen(query.body.size(), false);
  std::vector<int> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    int node = stack.back();
    stack.pop_back();
    for (int next : adjacent[node]) {
      if (!seen[next]) {
        seen[next] = true;
        ++reached;
        stack.push_back(next);
      }
    }
  }
  return reached == query.body.size();
}

bool contains(const ConjunctiveQuery& outer, const ConjunctiveQuery& inner) {
  if (outer.head.size() != inner.head.size()) {
    throw Error(ErrorKind::InvalidArgument, "containment requires equal head arity");
  }
  std::map<std::string, Term> binding;
  for (std::size_t j = 0; j < outer.head.size(); ++j) {
    const Term& t = outer.head[j];
    const Term& u = inner.head[j];
    if (!t.is_variable) {
      if (u.is_variable || u.text != t.text) return false;
      continue;
    }
    auto it = binding.find(t.text);
    if (it == binding.end()) {
      binding.emplace(t.text, u);
    } else if (!(it->second == u)) {
      return false;
    }
  }
  std::vector<std::size_t> order(outer.body.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return outer.body[a].relation < outer.body[b].relation;
  });
  return find_homomorphism(outer, inner, order, 0, binding);
}

bool equivalent(const ConjunctiveQuery& a, const ConjunctiveQuery& b) {
  return contains(a, b) && contains(b, a);
}

}  // namespace provabs
