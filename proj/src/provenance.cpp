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

#include "provabs/provenance.hpp"

namespace provabs {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::UnknownAnnotation: return "UnknownAnnotation";
    case ErrorKind::LeafNotInDatabase: return "LeafNotInDatabase";
    case ErrorKind::DuplicateAnnotation: return "DuplicateAnnotation";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::InvalidAncestor: return "InvalidAncestor";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::AlignmentExplosion: return "AlignmentExplosion";
    case ErrorKind::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

int Monomial::degree() const {
  int total = 0;
  for (const auto& [label, power] : factors) {
    (void)label;
    total += power;
  }
  return total;
}

Monomial& Monomial::multiply(const std::string& label, int power) {
  if (power < 1) {
    throw Error(ErrorKind::Validation, "monomial power must be positive for '" + label + "'");
  }
  factors[label] += power;
  return *this;
}

void Polynomial::add(const Monomial& m) {
  terms[m.factors] += m.coefficient;
}

bool Polynomial::contains(const Monomial& m) const {
  auto it = terms.find(m.factors);
  return it != terms.end() && it->second >= m.coefficient;
}

const RelationSchema* KDatabase::schema(const std::string& relation) const {
  for (const auto& r : relations) {
    if (r.name == relation) return &r;
  }
  return nullptr;
}

const AnnotatedTuple* KDatabase::find(const Annotation& annotation) const {
  auto it = index.find(annotation);
  return it == index.end() ? nullptr : &it->second;
}

const AnnotatedTuple& KDatabase::require(const Annotation& annotation) const {
  const AnnotatedTuple* t = find(annotation);
  if (t == nullptr) {
    throw Error(ErrorKind::UnknownAnnotation,
                "annotation '" + annotation + "' is not in the database");
  }
  return *t;
}

void KDatabase::validate() const {
  std::size_t total = 0;
  std::set<std::string> names;
  for (const auto& schema : relations) {
    if (schema.name.empty()) {
      throw Error(ErrorKind::Validation, "relation with empty name");
    }
    if (!names.insert(schema.name).second) {
      throw Error(ErrorKind::Validation, "duplicate relation '" + schema.name + "'");
    }
  }
  for (const auto& [relation, rows] : tuples) {
    const RelationSchema* schema = this->schema(relation);
    if (schema == nullptr) {
      throw Error(ErrorKind::Validation, "tuples for undeclared relation '" + relation + "'");
    }
    for (const auto& tuple : rows) {
      if (tuple.values.size() != schema->arity()) {
        throw Error(ErrorKind::ArityMismatch,
                    "tuple '" + tuple.annotation + "' has " +
                        std::to_string(tuple.values.size()) + " values, relation '" +
                        relation + "' expects " + std::to_string(schema->arity()));
      }
      if (tuple.annotation.empty()) {
        throw Error(ErrorKind::Validation, "tuple with empty annotation in '" + relation + "'");
      }
      auto it = index.find(tuple.annotation);
      if (it == index.end() || !(it->second == tuple)) {
        throw Error(ErrorKind::Validation,
                    "index entry missing or inconsistent for '" + tuple.annotation + "'");
      }
      ++total;
    }
  }
  if (index.size() != total) {
    throw Error(ErrorKind::DuplicateAnnotation,
                "annotation index is not a bijection onto the tuples");
  }
}

std::set<Annotation> KDatabase::annotation_set() const {
  std::set<Annotation> out;
  for (const auto& [annotation, tuple] : index) {
    (void)tuple;
    out.insert(annotation);
  }
  return out;
}

void KExample::validate() const {
  if (output_arity < 0) {
    throw Error(ErrorKind::Validation, "negative output arity");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const KExampleRow& row = rows[i];
    if (static_cast<int>(row.output.size()) != output_arity) {
      throw Error(ErrorKind::ArityMismatch,
                  "row " + std::to_string(i) + " has " + std::to_string(row.output.size()) +
                      " output values, expected " + std::to_string(output_arity));
    }
    if (row.provenance.factors.empty()) {
      throw Error(ErrorKind::Validation, "row " + std::to_string(i) + " has empty provenance");
    }
    if (row.provenance.coefficient != 1) {
      throw Error(ErrorKind::Validation,
                  "row " + std::to_string(i) + " has coefficient != 1");
    }
    for (const auto& [label, power] : row.provenance.factors) {
      if (power < 1) {
        throw Error(ErrorKind::Validation,
                    "row " + std::to_string(i) + " has non-positive power for '" + label + "'");
      }
    }
  }
}

std::set<std::string> var_set(const KExample& example) {
  std::set<std::string> out;
  for (const auto& row : example.rows) {
    for (const auto& [label, power] : row.provenance.factors) {
      (void)power;
      out.insert(label);
    }
  }
  return out;
}

int monomial_degree(const Monomial& m) { return m.degree(); }

std::multiset<std::string> relation_skeleton(const Monomial& m, const KDatabase& db) {
  std::multiset<std::string> out;
  for (const auto& [annotation, power] : m.factors) {
    const AnnotatedTuple& tuple = db.require(annotation);
    for (int i = 0; i < power; ++i) out.insert(tuple.relation);
  }
  return out;
}

}  // namespace provabs
