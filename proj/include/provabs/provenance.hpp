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

#ifndef PROVABS_PROVENANCE_HPP
#define PROVABS_PROVENANCE_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "provabs/errors.hpp"

namespace provabs {

// Annotations are opaque string tokens; abstracted examples reuse the same
// slot for tree node labels.
using Annotation = std::string;

// Product of annotations with positive integer powers. Factors are kept in a
// std::map so the lexicographic order by label is the canonical order used
// everywhere (occurrence keys, printing, fingerprints).
struct Monomial {
  std::map<std::string, int> factors;
  long long coefficient = 1;

  int degree() const;
  Monomial& multiply(const std::string& label, int power = 1);

  bool operator==(const Monomial& other) const {
    return factors == other.factors && coefficient == other.coefficient;
  }
  bool operator!=(const Monomial& other) const { return !(*this == other); }
};

// Sum of monomials in canonical form: one entry per distinct factor map,
// coefficients merged and positive.
struct Polynomial {
  std::map<std::map<std::string, int>, long long> terms;

  void add(const Monomial& m);
  // True when m's factor map occurs with coefficient >= m.coefficient.
  bool contains(const Monomial& m) const;
  bool empty() const { return terms.empty(); }
  std::size_t size() const { return terms.size(); }

  bool operator==(const Polynomial& other) const { return terms == other.terms; }
};

struct AnnotatedTuple {
  std::string relation;
  std::vector<std::string> values;
  Annotation annotation;

  bool operator==(const AnnotatedTuple& other) const {
    return relation == other.relation && values == other.values &&
           annotation == other.annotation;
  }
};

struct RelationSchema {
  std::string name;
  std::vector<std::string> attributes;

  std::size_t arity() const { return attributes.size(); }
};

// Abstractly-tagged database: every tuple carries a distinct annotation and
// the index maps annotations back to tuples.
struct KDatabase {
  std::vector<RelationSchema> relations;
  std::map<std::string, std::vector<AnnotatedTuple>> tuples;
  std::map<Annotation, AnnotatedTuple> index;

  const RelationSchema* schema(const std::string& relation) const;
  const AnnotatedTuple* find(const Annotation& annotation) const;
  // Throws Error{UnknownAnnotation} when the annotation is not indexed.
  const AnnotatedTuple& require(const Annotation& annotation) const;

  // Checks the structural invariants: schema arities, annotation uniqueness,
  // index/tuple bijection. Throws Error{Validation | DuplicateAnnotation |
  // ArityMismatch} naming the offending entity.
  void validate() const;

  std::set<Annotation> annotation_set() const;
};

struct KExampleRow {
  std::vector<std::string> output;
  Monomial provenance;

  bool operator==(const KExampleRow& other) const {
    return output == other.output && provenance == other.provenance;
  }
};

struct KExample {
  int output_arity = 0;
  std::vector<KExampleRow> rows;

  void validate() const;

  bool operator==(const KExample& other) const {
    return output_arity == other.output_arity && rows == other.rows;
  }
};

// Union of factor labels over all rows. For abstracted examples this includes
// tree node labels; callers that need leaf-level variables filter against the
// tree.
std::set<std::string> var_set(const KExample& example);

int monomial_degree(const Monomial& m);

// Relation name of each factor's tuple, repeated per power.
// Throws Error{UnknownAnnotation} when a factor does not resolve.
std::multiset<std::string> relation_skeleton(const Monomial& m, const KDatabase& db);

}  // namespace provabs

#endif  // PROVABS_PROVENANCE_HPP
