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

#ifndef PROVABS_ABSTRACTION_HPP
#define PROVABS_ABSTRACTION_HPP

#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "provabs/provenance.hpp"

namespace provabs {

// Rooted labeled tree whose leaves are database annotations. Inner nodes
// generalize the leaves beneath them. Immutable after build().
class AbstractionTree {
 public:
  struct NodeSpec {
    std::string label;
    std::string parent;  // empty for the root
    double weight = 1.0; // meaningful for leaves (weighted loss model)
  };

  static AbstractionTree build(const std::vector<NodeSpec>& nodes);

  bool has_node(const std::string& label) const;
  bool is_leaf(const std::string& label) const;
  bool is_inner(const std::string& label) const;
  const std::string& root() const { return root_; }
  int depth(const std::string& label) const;
  const std::string& parent(const std::string& label) const;

  // Leaves of the subtree rooted at label, sorted lexicographically. This
  // order is part of the concretization-enumeration contract.
  const std::vector<std::string>& leaves_under(const std::string& label) const;
  long long leaf_count(const std::string& label) const;
  const std::vector<std::string>& leaf_labels() const { return leaves_; }
  std::vector<std::string> inner_labels() const;
  std::vector<std::string> all_labels() const;
  double leaf_weight(const std::string& leaf) const;

  // Entropy of the normalized leaf-weight distribution within the subtree.
  double subtree_entropy(const std::string& label) const;

  // Path from the label up to the root, starting at the label itself.
  std::vector<std::string> ancestors_or_self(const std::string& label) const;
  bool is_ancestor_or_self(const std::string& node, const std::string& descendant) const;

  int height() const { return height_; }

 private:
  struct Node {
    std::string parent;
    std::vector<std::string> children;
    int depth = 0;
    double weight = 1.0;
  };

  const Node& node(const std::string& label) const;

  std::map<std::string, Node> nodes_;
  std::string root_;
  std::vector<std::string> leaves_;
  std::map<std::string, std::vector<std::string>> leaves_under_;
  std::map<std::string, double> entropy_;
  int height_ = 0;
};

// One occurrence of one factor inside a K-example: row index, position of the
// factor in the row's canonical (lexicographic) factor order, and repetition
// index below the factor's power.
struct OccurrenceKey {
  int row = 0;
  int factor_pos = 0;
  int repeat = 0;

  bool operator==(const OccurrenceKey& other) const {
    return row == other.row && factor_pos == other.factor_pos && repeat == other.repeat;
  }
  bool operator<(const OccurrenceKey& other) const {
    if (row != other.row) return row < other.row;
    if (factor_pos != other.factor_pos) return factor_pos < other.factor_pos;
    return repeat < other.repeat;
  }
};

struct Occurrence {
  OccurrenceKey key;
  std::string label;
};

// Every factor occurrence of the example in canonical order (row-major,
// factors lexicographic, repeats in order).
std::vector<Occurrence> occurrences_of(const KExample& example);

// Per-occurrence assignment of annotations to tree ancestors. Occurrences
// missing from the map are identity; assignments must satisfy
// leaf <=_T assigned node.
struct AbstractionChoice {
  std::map<OccurrenceKey, std::string> assignments;
  int edges_used = 0;

  bool is_identity() const;
};

struct AbstractedKExample {
  KExample example;
  // Present when produced by apply_abstraction; loaded abstracted examples
  // carry no choice and all operations work from the factors alone.
  std::optional<AbstractionChoice> choice;
};

// Leaf-level K-example obtained by reversing an abstraction.
struct Concretization {
  KExample example;
  std::map<OccurrenceKey, std::string> chosen_leaves;
  mutable std::optional<bool> connected;
};

enum class LossKind { Uniform, LeafWeighted, Explicit };

struct LossModel {
  LossKind kind = LossKind::Uniform;
  // Explicit mode: probability per concretization in enumeration order.
  std::vector<double> probabilities;

  static LossModel uniform() { return {}; }
  static LossModel leaf_weighted() { return {LossKind::LeafWeighted, {}}; }
  static LossModel explicit_distribution(std::vector<double> p) {
    return {LossKind::Explicit, std::move(p)};
  }
};

// Leaf-level variables of a possibly abstracted example: factor labels that
// are not inner nodes of the tree.
std::set<std::string> var_set(const KExample& example, const AbstractionTree& tree);

// True iff no inner-node label collides with a database annotation. Every
// tree leaf must resolve in the database; a missing leaf throws
// Error{LeafNotInDatabase} (distinct from incompatibility).
bool is_compatible(const AbstractionTree& tree, const KDatabase& db);

// Replaces each assigned occurrence by its node label. Throws
// Error{InvalidAncestor} when an assignment violates leaf <=_T node.
AbstractedKExample apply_abstraction(const AbstractionChoice& choice, const KExample& example,
                                     const AbstractionTree& tree);

// Product over abstracted occurrences of the assigned node's leaf count;
// saturates at LLONG_MAX (enumeration caps fire long before that matters).
long long concretization_count(const AbstractedKExample& abstracted,
                               const AbstractionTree& tree);

// Deterministic enumeration: occurrences in canonical order form an odometer
// over each node's lexicographically sorted leaves, rightmost occurrence
// varying fastest. With row_prefix only the first row_prefix rows are kept.
// Throws Error{CapExceeded} (carrying the count) when count exceeds cap.
std::vector<Concretization> enumerate_concretizations(const AbstractedKExample& abstracted,
                                                      const AbstractionTree& tree,
                                                      const KDatabase& db,
                                                      std::optional<int> row_prefix,
                                                      long long cap);

// Row-level helpers used by the privacy engine's incremental expansion.
long long row_concretization_count(const KExampleRow& row, const AbstractionTree& tree);
KExampleRow concretize_row(const KExampleRow& row, const AbstractionTree& tree, long long index);

double loss_of_information(const AbstractionChoice& choice, const AbstractionTree& tree,
                           const LossModel& model);
double loss_of_information(const AbstractedKExample& abstracted, const AbstractionTree& tree,
                           const LossModel& model);

// Lazily yields every abstraction choice (one ancestor-or-self per occurrence
// whose annotation is a tree leaf). Sorted mode: nondecreasing
// (edges_used, loss, lexicographic step vector); the identity choice comes
// first. Unsorted mode: plain odometer order over step vectors.
class ChoiceEnumerator {
 public:
  struct Item {
    AbstractionChoice choice;
    double loss = 0;
  };

  ChoiceEnumerator(const KExample& example, const AbstractionTree& tree, const LossModel& model,
                   bool sorted = true);

  std::optional<Item> next();
  // Total number of choices (saturating); Pi over occurrences of path length.
  long long total() const { return total_; }

 private:
  struct Dimension {
    OccurrenceKey key;
    std::vector<std::string> options;  // leaf..root
    std::vector<double> loss_contribution;
  };

  struct HeapNode {
    std::vector<int> steps;
    int edges;
    double loss;
  };

  struct HeapCompare {
    bool operator()(const HeapNode& a, const HeapNode& b) const {
      if (a.edges != b.edges) return a.edges > b.edges;
      if (a.loss != b.loss) return a.loss > b.loss;
      return a.steps > b.steps;
    }
  };

  Item make_item(const std::vector<int>& steps) const;
  double loss_of_steps(const std::vector<int>& steps) const;
  void push_successors(const HeapNode& node);

  std::vector<Dimension> dimensions_;
  bool sorted_;
  long long total_ = 1;
  // sorted mode
  std::priority_queue<HeapNode, std::vector<HeapNode>, HeapCompare> frontier_;
  // unsorted mode
  std::vector<int> odometer_;
  bool exhausted_ = false;
  bool started_ = false;
};

}  // namespace provabs

#endif  // PROVABS_ABSTRACTION_HPP
