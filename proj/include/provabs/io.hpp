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

#ifndef PROVABS_IO_HPP
#define PROVABS_IO_HPP

#include <string>

#include "provabs/optimizer.hpp"

namespace provabs {

// --- file formats -----------------------------------------------------------
//
// Database:   {"relations":[{"name":..,"attributes":[..],
//               "tuples":[{"ann":..,"values":[..]}]}]}
// Tree:       nested nodes {"label":..,"weight"?:..,"children":[..]};
//             childless nodes are leaves, absent weight = 1.0.
// K-example:  {"arity":N,"rows":[{"output":[..],
//               "prov":[{"ann":..,"pow"?:..}]}]}; absent pow = 1; an
//             abstracted example uses tree node labels in "ann".
// Distribution (explicit loss): [{"concretizationIndex":i,"probability":p}]
//             over the deterministic concretization enumeration order.
//
// Values are compared as exact strings; numbers are rejected.

KDatabase parse_database(const std::string& text);
AbstractionTree parse_tree(const std::string& text);
KExample parse_kexample(const std::string& text);

std::string save_database(const KDatabase& db);
std::string save_tree(const AbstractionTree& tree);
std::string save_kexample(const KExample& example);

KDatabase load_database(const std::string& path);
AbstractionTree load_tree(const std::string& path);
// Cross-validated variant: inner labels must not collide with annotations and
// every leaf must resolve.
AbstractionTree load_tree(const std::string& path, const KDatabase& db);
KExample load_kexample(const std::string& path);

// Cross-validation of example factors. With a tree, factors may also be
// inner-node labels (abstracted example); otherwise every factor must be a
// database annotation. Throws Error{UnknownAnnotation}.
void validate_example_factors(const KExample& example, const KDatabase& db,
                              const AbstractionTree* tree);

LossModel load_distribution(const std::string& path);
LossModel parse_distribution(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// FNV-1a 64-bit digest of the canonical serialization, for report headers.
std::string digest(const std::string& canonical_text);

// --- synthetic workloads ----------------------------------------------------

struct WorkloadSpec {
  int relation_count = 2;
  int tuples_per_relation = 50;
  int domain_size = 20;
  int tree_leaf_count = 20;
  int tree_height = 3;
  int branching = 3;
  int query_atom_count = 2;
  int join_count = 1;
  int example_rows = 2;
  unsigned seed = 0;

  void validate() const;
};

struct Workload {
  KDatabase db;
  AbstractionTree tree;
  ConjunctiveQuery query;
  KExample example;
};

// Seeded deterministic generator: a random database, a connected query whose
// evaluation yields at least example_rows outputs, the K-example taken from
// those outputs, and an abstraction tree over a subset of annotations biased
// to include the example's.
// Throws Error{InfeasibleSpec} when retries are exhausted.
Workload generate_workload(const WorkloadSpec& spec);

}  // namespace provabs

#endif  // PROVABS_IO_HPP
