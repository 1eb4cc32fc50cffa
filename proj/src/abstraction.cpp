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

#include "provabs/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace provabs {

namespace {

constexpr long long kCountSaturation = std::numeric_limits<long long>::max();

long long saturating_multiply(long long a, long long b) {
  if (a == 0 || b == 0) return 0;
  if (a > kCountSaturation / b) return kCountSaturation;
  return a * b;
}

}  // namespace

AbstractionTree AbstractionTree::build(const std::vector<NodeSpec>& specs) {
  AbstractionTree tree;
  for (const NodeSpec& spec : specs) {
    if (spec.label.empty()) {
      throw Error(ErrorKind::Validation, "tree node with empty label");
    }
    if (tree.nodes_.count(spec.label) != 0) {
      throw Error(ErrorKind::Validation, "duplicate tree label '" + spec.label + "'");
    }
    if (spec.weight <= 0) {
      throw Error(ErrorKind::Validation, "non-positive weight for tree node '" + spec.label + "'");
    }
    Node node;
    node.parent = spec.parent;
    node.weight = spec.weight;
    tree.nodes_.emplace(spec.label, std::move(node));
    if (spec.parent.empty()) {
      if (!tree.root_.empty()) {
        throw Error(ErrorKind::Validation,
                    "multiple roots: '" + tree.root_ + "' and '" + spec.label + "'");
      }
      tree.root_ = spec.label;
    }
  }
  if (tree.root_.empty()) {
    throw Error(ErrorKind::Validation, "abstraction tree has no root");
  }
  for (auto& [label, node] : tree.nodes_) {
    if (label == tree.root_) continue;
    auto parent = tree.nodes_.find(node.parent);
    if (parent == tree.nodes_.end()) {
      throw Error(ErrorKind::Validation,
                  "node '" + label + "' references unknown parent '" + node.parent + "'");
    }
    parent->second.children.push_back(label);
  }
  // Depths via BFS from the root; unreached nodes mean a cycle or a detached
  // component, both invalid.
  std::vector<std::string> frontier{tree.root_};
  std::size_t visited = 0;
  while (!frontier.empty()) {
    std::vector<std::string> next;
    for (const std::string& label : frontier) {
      ++visited;
      Node& node = tree.nodes_.at(label);
      if (label != tree.root_) node.depth = tree.nodes_.at(node.parent).depth + 1;
      tree.height_ = std::max(tree.height_, node.depth);
      for (const std::string& child : node.children) next.push_back(child);
    }
    frontier = std::move(next);
  }
  if (visited != tree.nodes_.size()) {
    throw Error(ErrorKind::Validation, "abstraction tree is not connected or contains a cycle");
  }
  for (const auto& [label, node] : tree.nodes_) {
    if (node.children.empty()) tree.leaves_.push_back(label);
  }
  std::sort(tree.leaves_.begin(), tree.leaves_.end());
  // leaves_under, bottom-up over depth order.
  std::vector<std::string> by_depth;
  by_depth.reserve(tree.nodes_.size());
  for (const auto& [label, node] : tree.nodes_) {
    (void)node;
    by_depth.push_back(label);
  }
  std::sort(by_depth.begin(), by_depth.end(), [&](const std::string& a, const std::string& b) {
    return tree.nodes_.at(a).depth > tree.nodes_.at(b).depth;
  });
  for (const std::string& label : by_depth) {
    const Node& node = tree.nodes_.at(label);
    std::vector<std::string>& mine = tree.leaves_under_[label];
    if (node.children.empty()) {
      mine.push_back(label);
    } else {
      for (const std::string& child : node.children) {
        const auto& theirs = tree.leaves_under_.at(child);
        mine.insert(mine.end(), theirs.begin(), theirs.end());
      }
      std::sort(mine.begin(), mine.end());
    }
  }
  for (const auto& [label, leaves] : tree.leaves_under_) {
    double total = 0;
    for (const std::string& leaf : leaves) total += tree.nodes_.at(leaf).weight;
    double entropy = 0;
    for (const std::string& leaf : leaves) {
      double p = tree.nodes_.at(leaf).weight / total;
      entropy -= p * std::log(p);
    }
    tree.entropy_[label] = leaves.size() == 1 ? 0.0 : entropy;
  }
  return tree;
}

const AbstractionTree::Node& AbstractionTree::node(const std::string& label) const {
  auto it = nodes_.find(label);
  if (it == nodes_.end()) {
    throw Error(ErrorKind::Validation, "unknown tree node '" + label + "'");
  }
  return it->second;
}

bool AbstractionTree::has_node(const std::string& label) const {
  return nodes_.count(label) != 0;
}

bool AbstractionTree::is_leaf(const std::string& label) const {
  return node(label).children.empty();
}

bool AbstractionTree::is_inner(const std::string& label) const {
  return !node(label).children.empty();
}

int AbstractionTree::depth(const std::string& label) const { return node(label).depth; }

const std::string& AbstractionTree::parent(const std::string& label) const {
  return node(label).parent;
}

const std::vector<std::string>& AbstractionTree::leaves_under(const std::string& label) const {
  node(label);
  return leaves_under_.at(label);
}

long long AbstractionTree::leaf_count(const std::string& label) const {
  return static_cast<long long>(leaves_under(label).size());
}

std::vector<std::string> AbstractionTree::inner_labels() const {
  std::vector<std::string> out;
  for (const auto& [label, node] : nodes_) {
    if (!node.children.empty()) out.push_back(label);
  }
  return out;
}

std::vector<std::string> AbstractionTree::all_labels() const {
  std::vector<std::string> out;
  for (const auto& [label, node] : nodes_) {
    (void)node;
    out.push_back(label);
  }
  return out;
}

double AbstractionTree::leaf_weight(const std::string& leaf) const { return node(leaf).weight; }

double AbstractionTree::subtree_entropy(const std::string& label) const {
  node(label);
  return entropy_.at(label);
}

std::vector<std::string> AbstractionTree::ancestors_or_self(const std::string& label) const {
  std::vector<std::string> out{label};
  std::string current = label;
  while (current != root_) {
    current = node(current).parent;
    out.push_back(current);
  }
  return out;
}

bool AbstractionTree::is_ancestor_or_self(const std::string& ancestor,
                                          const std::string& descendant) const {
  std::string current = descendant;
  node(ancestor);
  while (true) {
    if (current == ancestor) return true;
    if (current == root_) return false;
    current = node(current).parent;
  }
}

std::vector<Occurrence> occurrences_of(const KExample& example) {
  std::vector<Occurrence> out;
  for (std::size_t row = 0; row < example.rows.size(); ++row) {
    int pos = 0;
    for (const auto& [label, power] : example.rows[row].provenance.factors) {
      for (int rep = 0; rep < power; ++rep) {
        out.push_back({{static_cast<int>(row), pos, rep}, label});
      }
      ++pos;
    }
  }
  return out;
}

bool AbstractionChoice::is_identity() const { return edges_used == 0; }

std::set<std::string> var_set(const KExample& example, const AbstractionTree& tree) {
  std::set<std::string> out;
  for (const std::string& label : var_set(example)) {
    if (tree.has_node(label) && tree.is_inner(label)) continue;
    out.insert(label);
  }
  return out;
}

bool is_compatible(const AbstractionTree& tree, const KDatabase& db) {
  for (const std::string& label : tree.inner_labels()) {
    if (db.find(label) != nullptr) return false;
  }
  for (const std::string& leaf : tree.leaf_labels()) {
    if (db.find(leaf) == nullptr) {
      throw Error(ErrorKind::LeafNotInDatabase,
                  "tree leaf '" + leaf + "' does not resolve to a database annotation");
    }
  }
  return true;
}

AbstractedKExample apply_abstraction(const AbstractionChoice& choice, const KExample& example,
                                     const AbstractionTree& tree) {
  AbstractedKExample out;
  out.example.output_arity = example.output_arity;
  out.example.rows.resize(example.rows.size());
  for (std::size_t row = 0; row < example.rows.size(); ++row) {
    out.example.rows[row].output = example.rows[row].output;
  }
  int edges = 0;
  for (const Occurrence& occ : occurrences_of(example)) {
    std::string target = occ.label;
    auto it = choice.assignments.find(occ.key);
    if (it != choice.assignments.end()) {
      if (!tree.has_node(occ.label) || !tree.is_leaf(occ.label)) {
        throw Error(ErrorKind::InvalidAncestor,
                    "occurrence of '" + occ.label + "' is not a tree leaf");
      }
      if (!tree.is_ancestor_or_self(it->second, occ.label)) {
        throw Error(ErrorKind::InvalidAncestor,
                    "'" + it->second + "' is not an ancestor of leaf '" + occ.label + "'");
      }
      target = it->second;
      edges += tree.depth(occ.label) - tree.depth(it->second);
    }
    out.example.rows[occ.key.row].provenance.multiply(target);
  }
  AbstractionChoice recorded = choice;
  recorded.edges_used = edges;
  out.choice = std::move(recorded);
  return out;
}

namespace {

// Abstracted occurrences of a row: factor occurrences whose label is an inner
// node of the tree, with the node's sorted leaf list as options.
struct RowDimensions {
  std::vector<OccurrenceKey> keys;
  std::vector<const std::vector<std::string>*> options;
  long long count = 1;
};

RowDimensions row_dimensions(const KExampleRow& row, int row_index, const AbstractionTree& tree) {
  RowDimensions dims;
  int pos = 0;
  for (const auto& [label, power] : row.provenance.factors) {
    if (tree.has_node(label) && tree.is_inner(label)) {
      for (int rep = 0; rep < power; ++rep) {
        dims.keys.push_back({row_index, pos, rep});
        dims.options.push_back(&tree.leaves_under(label));
        dims.count = saturating_multiply(dims.count,
                                         static_cast<long long>(tree.leaves_under(label).size()));
      }
    }
    ++pos;
  }
  return dims;
}

KExampleRow build_row(const KExampleRow& row, const AbstractionTree& tree,
                      const RowDimensions& dims, const std::vector<long long>& digits,
                      std::map<OccurrenceKey, std::string>* chosen) {
  KExampleRow out;
  out.output = row.output;
  int pos = 0;
  std::size_t dim = 0;
  for (const auto& [label, power] : row.provenance.factors) {
    bool abstracted = tree.has_node(label) && tree.is_inner(label);
    for (int rep = 0; rep < power; ++rep) {
      if (abstracted) {
        const std::string& leaf = (*dims.options[dim])[static_cast<std::size_t>(digits[dim])];
        out.provenance.multiply(leaf);
        if (chosen != nullptr) (*chosen)[dims.keys[dim]] = leaf;
        ++dim;
      } else {
        out.provenance.multiply(label);
      }
    }
    ++pos;
  }
  return out;
}

}  // namespace

long long concretization_count(const AbstractedKExample& abstracted,
                               const AbstractionTree& tree) {
  long long count = 1;
  for (std::size_t row = 0; row < abstracted.example.rows.size(); ++row) {
    count = saturating_multiply(
        count, row_dimensions(abstracted.example.rows[row], static_cast<int>(row), tree).count);
  }
  return count;
}

long long row_concretization_count(const KExampleRow& row, const AbstractionTree& tree) {
  return row_dimensions(row, 0, tree).count;
}

KExampleRow concretize_row(const KExampleRow& row, const AbstractionTree& tree, long long index) {
  RowDimensions dims = row_dimensions(row, 0, tree);
  if (index < 0 || index >= dims.count) {
    throw Error(ErrorKind::InvalidArgument, "row concretization index out of range");
  }
  std::vector<long long> digits(dims.keys.size(), 0);
  for (std::size_t i = dims.keys.size(); i-- > 0;) {
    long long radix = static_cast<long long>(dims.options[i]->size());
    digits[i] = index % radix;
    index /= radix;
  }
  return build_row(row, tree, dims, digits, nullptr);
}

std::vector<Concretization> enumerate_concretizations(const AbstractedKExample& abstracted,
                                                      const AbstractionTree& tree,
                                                      const KDatabase& db,
                                                      std::optional<int> row_prefix,
                                                      long long cap) {
  std::size_t row_count = abstracted.example.rows.size();
  if (row_prefix.has_value()) {
    row_count = std::min(row_count, static_cast<std::size_t>(std::max(0, *row_prefix)));
  }
  std::vector<RowDimensions> rows;
  long long count = 1;
  for (std::size_t row = 0; row < row_count; ++row) {
    rows.push_back(row_dimensions(abstracted.example.rows[row], static_cast<int>(row), tree));
    count = saturating_multiply(count, rows.back().count);
  }
  if (count > cap) {
    throw Error(ErrorKind::CapExceeded,
                "concretization set of size " + std::to_string(count) + " exceeds cap " +
                    std::to_string(cap),
                count);
  }
  for (const RowDimensions& dims : rows) {
    for (const auto* options : dims.options) {
      for (const std::string& leaf : *options) db.require(leaf);
    }
  }

  std::vector<Concretization> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<long long> indices(row_count, 0);
  while (true) {
    Concretization c;
    c.example.output_arity = abstracted.example.output_arity;
    for (std::size_t row = 0; row < row_count; ++row) {
      long long index = indices[row];
      std::vector<long long> digits(rows[row].keys.size(), 0);
      for (std::size_t i = rows[row].keys.size(); i-- > 0;) {
        long long radix = static_cast<long long>(rows[row].options[i]->size());
        digits[i] = index % radix;
        index /= radix;
      }
      c.example.rows.push_back(build_row(abstracted.example.rows[row], tree, rows[row], digits,
                                         &c.chosen_leaves));
    }
    out.push_back(std::move(c));
    // Advance the row-major odometer, last row fastest.
    std::size_t row = row_count;
    while (row-- > 0) {
      if (++indices[row] < rows[row].count) break;
      indices[row] = 0;
      if (row == 0) return out;
    }
    if (row_count == 0) return out;
  }
}

namespace {

double occurrence_loss(const std::string& node_label, const AbstractionTree& tree,
                       const LossModel& model) {
  switch (model.kind) {
    case LossKind::Uniform:
      return std::log(static_cast<double>(tree.leaf_count(node_label)));
    case LossKind::LeafWeighted:
      return tree.subtree_entropy(node_label);
    case LossKind::Explicit:
      throw Error(ErrorKind::InvalidDistribution,
                  "explicit distributions have no per-occurrence decomposition");
  }
  return 0;
}

double explicit_entropy(long long count, const LossModel& model) {
  if (static_cast<long long>(model.probabilities.size()) != count) {
    throw Error(ErrorKind::InvalidDistribution,
                "distribution has " + std::to_string(model.probabilities.size()) +
                    " entries, concretization set has " + std::to_string(count));
  }
  double sum = 0;
  double entropy = 0;
  for (double p : model.probabilities) {
    if (p <= 0) {
      throw Error(ErrorKind::InvalidDistribution, "probabilities must be positive");
    }
    sum += p;
    entropy -= p * std::log(p);
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidDistribution,
                "probabilities sum to " + std::to_string(sum) + ", expected 1");
  }
  return entropy;
}

}  // namespace

double loss_of_information(const AbstractionChoice& choice, const AbstractionTree& tree,
                           const LossModel& model) {
  if (model.kind == LossKind::Explicit) {
    long long count = 1;
    for (const auto& [key, label] : choice.assignments) {
      (void)key;
      count = saturating_multiply(count, tree.leaf_count(label));
    }
    return explicit_entropy(count, model);
  }
  double total = 0;
  for (const auto& [key, label] : choice.assignments) {
    (void)key;
    total += occurrence_loss(label, tree, model);
  }
  return total;
}

double loss_of_information(const AbstractedKExample& abstracted, const AbstractionTree& tree,
                           const LossModel& model) {
  if (model.kind == LossKind::Explicit) {
    return explicit_entropy(concretization_count(abstracted, tree), model);
  }
  double total = 0;
  for (const Occurrence& occ : occurrences_of(abstracted.example)) {
    if (tree.has_node(occ.label) && tree.is_inner(occ.label)) {
      total += occurrence_loss(occ.label, tree, model);
    }
  }
  return total;
}

ChoiceEnumerator::ChoiceEnumerator(const KExample& example, const AbstractionTree& tree,
                                   const LossModel& model, bool sorted)
    : sorted_(sorted) {
  if (model.kind == LossKind::Explicit) {
    throw Error(ErrorKind::InvalidDistribution,
                "choice enumeration requires a uniform or leaf-weighted loss model");
  }
  for (const Occurrence& occ : occurrences_of(example)) {
    if (!tree.has_node(occ.label) || !tree.is_leaf(occ.label)) continue;
    Dimension dim;
    dim.key = occ.key;
    dim.options = tree.ancestors_or_self(occ.label);
    for (const std::string& option : dim.options) {
      dim.loss_contribution.push_back(occurrence_loss(option, tree, model));
    }
    total_ = saturating_multiply(total_, static_cast<long long>(dim.options.size()));
    dimensions_.push_back(std::move(dim));
  }
  if (sorted_) {
    frontier_.push({std::vector<int>(dimensions_.size(), 0), 0, 0.0});
  } else {
    odometer_.assign(dimensions_.size(), 0);
  }
}

ChoiceEnumerator::Item ChoiceEnumerator::make_item(const std::vector<int>& steps) const {
  Item item;
  int edges = 0;
  for (std::size_t i = 0; i < dimensions_.size(); ++i) {
    const Dimension& dim = dimensions_[i];
    item.choice.assignments[dim.key] = dim.options[static_cast<std::size_t>(steps[i])];
    edges += steps[i];
  }
  item.choice.edges_used = edges;
  item.loss = loss_of_steps(steps);
  return item;
}

double ChoiceEnumerator::loss_of_steps(const std::vector<int>& steps) const {
  // Summed in one fixed order so heap keys and yielded losses are bitwise
  // identical, keeping ties exact.
  double loss = 0;
  for (std::size_t i = 0; i < dimensions_.size(); ++i) {
    loss += dimensions_[i].loss_contribution[static_cast<std::size_t>(steps[i])];
  }
  return loss;
}

void ChoiceEnumerator::push_successors(const HeapNode& node) {
  // Each vector is generated exactly once: only coordinates at or after the
  // rightmost nonzero one may be incremented.
  std::size_t start = 0;
  for (std::size_t i = dimensions_.size(); i-- > 0;) {
    if (node.steps[i] != 0) {
      start = i;
      break;
    }
  }
  for (std::size_t i = start; i < dimensions_.size(); ++i) {
    if (node.steps[i] + 1 >= static_cast<int>(dimensions_[i].options.size())) continue;
    HeapNode next = node;
    next.steps[i] += 1;
    next.edges += 1;
    next.loss = loss_of_steps(next.steps);
    frontier_.push(std::move(next));
  }
}

std::optional<ChoiceEnumerator::Item> ChoiceEnumerator::next() {
  if (sorted_) {
    if (frontier_.empty()) return std::nullopt;
    HeapNode node = frontier_.top();
    frontier_.pop();
    push_successors(node);
    return make_item(node.steps);
  }
  if (exhausted_) return std::nullopt;
  if (!started_) {
    started_ = true;
    return make_item(odometer_);
  }
  std::size_t i = dimensions_.size();
  while (i-- > 0) {
    if (++odometer_[i] < static_cast<int>(dimensions_[i].options.size())) {
      return make_item(odometer_);
    }
    odometer_[i] = 0;
  }
  exhausted_ = true;
  return std::nullopt;
}

}  // namespace provabs
