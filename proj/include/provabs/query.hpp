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

#ifndef PROVABS_QUERY_HPP
#define PROVABS_QUERY_HPP

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "provabs/provenance.hpp"

namespace provabs {

struct Term {
  bool is_variable = false;
  std::string text;

  static Term variable(std::string name) { return Term{true, std::move(name)}; }
  static Term constant(std::string value) { return Term{false, std::move(value)}; }

  bool operator==(const Term& other) const {
    return is_variable == other.is_variable && text == other.text;
  }
  bool operator<(const Term& other) const {
    if (is_variable != other.is_variable) return is_variable < other.is_variable;
    return text < other.text;
  }
};

struct Atom {
  std::string relation;
  std::vector<Term> terms;

  bool operator==(const Atom& other) const {
    return relation == other.relation && terms == other.terms;
  }
};

// Plain conjunctive query: T(head) :- R1(...), ..., Rl(...). Head variables
// must occur in the body; constants are permitted in both head and body.
struct ConjunctiveQuery {
  std::string head_relation = "Q";
  std::vector<Term> head;
  std::vector<Atom> body;

  int variable_count() const;
  void validate() const;

  bool operator==(const ConjunctiveQuery& other) const {
    return head == other.head && body == other.body;
  }
};

// Grammar:  Q(t1,...,tk) :- R(a,...), S(b,...)
// Identifiers are variables, single-quoted strings are constants, '%' starts
// a comment line. Throws Error{Parse} with the offending position.
ConjunctiveQuery parse_query(std::string_view text);
std::string print_query(const ConjunctiveQuery& query);

// N[X] evaluation: for each output tuple the polynomial summing, over
// derivations, the per-atom product of the matched tuples' annotations (a
// tuple matched by two atoms contributes its annotation squared).
// Throws Error{SchemaMismatch} when an atom does not fit the schema.
std::map<std::vector<std::string>, Polynomial> evaluate(const ConjunctiveQuery& query,
                                                        const KDatabase& db);

// Join graph over body atoms, an edge whenever two atoms share a variable.
std::vector<std::pair<int, int>> join_graph_edges(const ConjunctiveQuery& query);
bool is_connected_query(const ConjunctiveQuery& query);

// Homomorphism containment: true iff inner is contained in outer, i.e. there
// is a homomorphism from outer to inner mapping head to head positionally and
// constants to themselves.
bool contains(const ConjunctiveQuery& outer, const ConjunctiveQuery& inner);
bool equivalent(const ConjunctiveQuery& a, const ConjunctiveQuery& b);

}  // namespace provabs

#endif  // PROVABS_QUERY_HPP
