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

#include "provabs/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace provabs {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, what + ": " + e.what());
  }
}

std::string require_string(const json& node, const char* key, const std::string& context) {
  if (!node.contains(key) || !node[key].is_string()) {
    throw Error(ErrorKind::Parse, context + ": missing or non-string field '" + key + "'");
  }
  return node[key].get<std::string>();
}

std::vector<std::string> require_string_array(const json& node, const char* key,
                                              const std::string& context) {
  if (!node.contains(key) || !node[key].is_array()) {
    throw Error(ErrorKind::Parse, context + ": missing or non-array field '" + key + "'");
  }
  std::vector<std::string> out;
  for (const json& item : node[key]) {
    if (!item.is_string()) {
      throw Error(ErrorKind::Parse,
                  context + ": field '" + key + "' must contain strings only");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

KDatabase parse_database(const std::string& text) {
  json root = parse_json(text, "database");
  if (!root.is_object() || !root.contains("relations") || !root["relations"].is_array()) {
    throw Error(ErrorKind::Parse, "database: expected top-level object with 'relations' array");
  }
  KDatabase db;
  for (const json& rel : root["relations"]) {
    RelationSchema schema;
    schema.name = require_string(rel, "name", "database relation");
    schema.attributes = require_string_array(rel, "attributes", "relation '" + schema.name + "'");
    db.relations.push_back(schema);
    auto& rows = db.tuples[schema.name];
    if (rel.contains("tuples")) {
      if (!rel["tuples"].is_array()) {
        throw Error(ErrorKind::Parse, "relation '" + schema.name + "': 'tuples' must be an array");
      }
      for (const json& t : rel["tuples"]) {
        AnnotatedTuple tuple;
        tuple.relation = schema.name;
        tuple.annotation = require_string(t, "ann", "tuple in '" + schema.name + "'");
        tuple.values = require_string_array(t, "values", "tuple '" + tuple.annotation + "'");
        if (tuple.values.size() != schema.arity()) {
          throw Error(ErrorKind::ArityMismatch,
                      "tuple '" + tuple.annotation + "' has " +
                          std::to_string(tuple.values.size()) + " values, relation '" +
                          schema.name + "' expects " + std::to_string(schema.arity()));
        }
        if (db.index.count(tuple.annotation) != 0) {
          throw Error(ErrorKind::DuplicateAnnotation,
                      "annotation '" + tuple.annotation + "' used twice");
        }
        db.index.emplace(tuple.annotation, tuple);
        rows.push_back(std::move(tuple));
      }
    }
  }
  db.validate();
  return db;
}

std::string save_database(const KDatabase& db) {
  ordered_json root;
  root["relations"] = ordered_json::array();
  for (const RelationSchema& schema : db.relations) {
    ordered_json rel;
    rel["name"] = schema.name;
    rel["attributes"] = schema.attributes;
    rel["tuples"] = ordered_json::array();
    auto it = db.tuples.find(schema.name);
    if (it != db.tuples.end()) {
      for (const AnnotatedTuple& tuple : it->second) {
        ordered_json t;
        t["ann"] = tuple.annotation;
        t["values"] = tuple.values;
        rel["tuples"].push_back(std::move(t));
      }
    }
    root["relations"].push_back(std::move(rel));
  }
  return root.dump(2) + "\n";
}

namespace {

void collect_tree_nodes(const json& node, const std::string& parent,
                        std::vector<AbstractionTree::NodeSpec>& out) {
  AbstractionTree::NodeSpec spec;
  spec.label = require_string(node, "label", "tree node");
  spec.parent = parent;
  if (node.contains("weight")) {
    if (!node["weight"].is_number()) {
      throw Error(ErrorKind::Parse, "tree node '" + spec.label + "': weight must be a number");
    }
    spec.weight = node["weight"].get<double>();
  }
  out.push_back(spec);
  if (node.contains("children")) {
    if (!node["children"].is_array()) {
      throw Error(ErrorKind::Parse,
                  "tree node '" + spec.label + "': 'children' must be an array");
    }
    for (const json& child : node["children"]) {
      collect_tree_nodes(child, spec.label, out);
    }
  }
}

ordered_json tree_node_json(const AbstractionTree& tree, const std::string& label) {
  ordered_json node;
  node["label"] = label;
  if (tree.is_leaf(label)) {
    if (tree.leaf_weight(label) != 1.0) node["weight"] = tree.leaf_weight(label);
    return node;
  }
  node["children"] = ordered_json::array();
  // Children in lexicographic order: the canonical form.
  std::vector<std::string> children;
  for (const std::string& candidate : tree.all_labels()) {
    if (candidate != tree.root() && tree.parent(candidate) == label) {
      children.push_back(candidate);
    }
  }
  std::sort(children.begin(), children.end());
  for (const std::string& child : children) {
    node["children"].push_back(tree_node_json(tree, child));
  }
  return node;
}

}  // namespace

AbstractionTree parse_tree(const std::string& text) {
  json root = parse_json(text, "tree");
  if (!root.is_object()) {
    throw Error(ErrorKind::Parse, "tree: expected a top-level node object");
  }
  std::vector<AbstractionTree::NodeSpec> specs;
  collect_tree_nodes(root, "", specs);
  return AbstractionTree::build(specs);
}

std::string save_tree(const AbstractionTree& tree) {
  return tree_node_json(tree, tree.root()).dump(2) + "\n";
}

KExample parse_kexample(const std::string& text) {
  json root = parse_json(text, "k-example");
  if (!root.is_object() || !root.contains("arity") ||
      !root["arity"].is_number_integer() || !root.contains("rows") || !root["rows"].is_array()) {
    throw Error(ErrorKind::Parse, "k-example: expected object with integer 'arity' and 'rows'");
  }
  KExample example;
  example.output_arity = root["arity"].get<int>();
  for (const json& r : root["rows"]) {
    KExampleRow row;
    row.output = require_string_array(r, "output", "k-example row");
    if (!r.contains("prov") || !r["prov"].is_array()) {
      throw Error(ErrorKind::Parse, "k-example row: missing 'prov' array");
    }
    for (const json& f : r["prov"]) {
      std::string ann = require_string(f, "ann", "provenance factor");
      int pow = 1;
      if (f.contains("pow")) {
        if (!f["pow"].is_number_integer()) {
          throw Error(ErrorKind::Parse, "factor '" + ann + "': pow must be an integer");
        }
        pow = f["pow"].get<int>();
      }
      if (pow < 1) {
        throw Error(ErrorKind::Parse, "factor '" + ann + "': pow must be positive");
      }
      row.provenance.multiply(ann, pow);
    }
    example.rows.push_back(std::move(row));
  }
  example.validate();
  return example;
}

std::string save_kexample(const KExample& example) {
  ordered_json root;
  root["arity"] = example.output_arity;
  root["rows"] = ordered_json::array();
  for (const KExampleRow& row : example.rows) {
    ordered_json r;
    r["output"] = row.output;
    r["prov"] = ordered_json::array();
    for (const auto& [label, power] : row.provenance.factors) {
      ordered_json f;
      f["ann"] = label;
      if (power != 1) f["pow"] = power;
      r["prov"].push_back(std::move(f));
    }
    root["rows"].push_back(std::move(r));
  }
  return root.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  }
  out << content;
}

KDatabase load_database(const std::string& path) { return parse_database(read_file(path)); }

AbstractionTree load_tree(const std::string& path) { return parse_tree(read_file(path)); }

AbstractionTree load_tree(const std::string& path, const KDatabase& db) {
  AbstractionTree tree = parse_tree(read_file(path));
  if (!is_compatible(tree, db)) {
    throw Error(ErrorKind::Validation,
                "tree in '" + path + "' is not compatible: an inner label is a database annotation");
  }
  return tree;
}

KExample load_kexample(const std::string& path) { return parse_kexample(read_file(path)); }

void validate_example_factors(const KExample& example, const KDatabase& db,
                              const AbstractionTree* tree) {
  for (const std::string& label : var_set(example)) {
    if (db.find(label) != nullptr) continue;
    if (tree != nullptr && tree->has_node(label) && tree->is_inner(label)) continue;
    throw Error(ErrorKind::UnknownAnnotation,
                "example factor '" + label + "' is neither a database annotation nor a tree node");
  }
}

LossModel parse_distribution(const std::string& text) {
  json root = parse_json(text, "distribution");
  if (!root.is_array()) {
    throw Error(ErrorKind::Parse, "distribution: expected a top-level array");
  }
  std::map<long long, double> by_index;
  for (const json& entry : root) {
    if (!entry.contains("concretizationIndex") || !entry["concretizationIndex"].is_number_integer() ||
        !entry.contains("probability") || !entry["probability"].is_number()) {
      throw Error(ErrorKind::Parse,
                  "distribution entries need integer 'concretizationIndex' and numeric "
                  "'probability'");
    }
    long long index = entry["concretizationIndex"].get<long long>();
    if (!by_index.emplace(index, entry["probability"].get<double>()).second) {
      throw Error(ErrorKind::InvalidDistribution,
                  "duplicate concretizationIndex " + std::to_string(index));
    }
  }
  std::vector<double> probabilities(by_index.size(), 0.0);
  for (const auto& [index, p] : by_index) {
    if (index < 0 || index >= static_cast<long long>(probabilities.size())) {
      throw Error(ErrorKind::InvalidDistribution,
                  "concretizationIndex " + std::to_string(index) +
                      " out of range; indices must cover 0.." +
                      std::to_string(probabilities.size() - 1));
    }
    probabilities[static_cast<std::size_t>(index)] = p;
  }
  return LossModel::explicit_distribution(std::move(probabilities));
}

LossModel load_distribution(const std::string& path) {
  return parse_distribution(read_file(path));
}

std::string digest(const std::string& canonical_text) {
  unsigned long long hash = 1469598103934665603ull;
  for (unsigned char c : canonical_text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", hash);
  return buffer;
}

void WorkloadSpec::validate() const {
  auto positive = [](int value, const char* name) {
    if (value < 1) {
      throw Error(ErrorKind::InfeasibleSpec, std::string(name) + " must be at least 1");
    }
  };
  positive(relation_count, "relationCount");
  positive(tuples_per_relation, "tuplesPerRelation");
  positive(domain_size, "domainSize");
  positive(tree_leaf_count, "treeLeafCount");
  positive(tree_height, "treeHeight");
  positive(branching, "branchingProfile");
  positive(query_atom_count, "queryAtomCount");
  positive(example_rows, "exampleRows");
  if (join_count < query_atom_count - 1) {
    throw Error(ErrorKind::InfeasibleSpec,
                "joinCount must be at least queryAtomCount - 1 for a connected query");
  }
}

namespace {

// Desk-scale analog of the scalability settings: random relations, a random
// connected query over them, and an abstraction tree with uniform leaf depth.
struct Generator {
  const WorkloadSpec& spec;
  std::mt19937 rng;

  explicit Generator(const WorkloadSpec& s) : spec(s), rng(s.seed) {}

  int uniform(int lo, int hi) {  // inclusive bounds
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  }

  KDatabase make_database() {
    KDatabase db;
    for (int r = 0; r < spec.relation_count; ++r) {
      RelationSchema schema;
      schema.name = "R" + std::to_string(r + 1);
      int arity = 2 + (r % 2);
      for (int a = 0; a < arity; ++a) schema.attributes.push_back("a" + std::to_string(a + 1));
      db.relations.push_back(schema);
      auto& rows = db.tuples[schema.name];
      std::set<std::vector<std::string>> distinct;
      int attempts = 0;
      int limit = spec.tuples_per_relation * 60 + 60;
      while (static_cast<int>(rows.size()) < spec.tuples_per_relation) {
        if (++attempts > limit) {
          throw Error(ErrorKind::InfeasibleSpec,
                      "cannot draw " + std::to_string(spec.tuples_per_relation) +
                          " distinct tuples for '" + schema.name + "' from domain size " +
                          std::to_string(spec.domain_size));
        }
        std::vector<std::string> values;
        for (int a = 0; a < arity; ++a) {
          values.push_back("v" + std::to_string(uniform(0, spec.domain_size - 1)));
        }
        if (!distinct.insert(values).second) continue;
        AnnotatedTuple tuple;
        tuple.relation = schema.name;
        tuple.values = values;
        tuple.annotation = "r" + std::to_string(r + 1) + "_" + std::to_string(rows.size());
        db.index.emplace(tuple.annotation, tuple);
        rows.push_back(std::move(tuple));
      }
    }
    db.validate();
    return db;
  }

  ConjunctiveQuery make_query(const KDatabase& db) {
    // Atom relations, then a spanning set of joins, then extra joins, then a
    // sprinkle of constants drawn from live column values.
    std::vector<const RelationSchema*> atoms;
    for (int i = 0; i < spec.query_atom_count; ++i) {
      atoms.push_back(&db.relations[static_cast<std::size_t>(uniform(
          0, static_cast<int>(db.relations.size()) - 1))]);
    }
    std::vector<std::vector<int>> var_of;  // variable id per (atom, column)
    int next_var = 0;
    for (const RelationSchema* schema : atoms) {
      std::vector<int> columns;
      for (std::size_t c = 0; c < schema->arity(); ++c) columns.push_back(next_var++);
      var_of.push_back(std::move(columns));
    }
    auto merge = [&](int keep, int drop) {
      if (keep == drop) return;
      for (auto& columns : var_of) {
        for (int& v : columns) {
          if (v == drop) v = keep;
        }
      }
    };
    for (std::size_t j = 1; j < var_of.size(); ++j) {
      std::size_t i = static_cast<std::size_t>(uniform(0, static_cast<int>(j) - 1));
      int ci = uniform(0, static_cast<int>(var_of[i].size()) - 1);
      int cj = uniform(0, static_cast<int>(var_of[j].size()) - 1);
      merge(var_of[i][static_cast<std::size_t>(ci)], var_of[j][static_cast<std::size_t>(cj)]);
    }
    int extra = spec.join_count - (spec.query_atom_count - 1);
    for (int e = 0; e < extra && var_of.size() > 1; ++e) {
      std::size_t i = static_cast<std::size_t>(uniform(0, static_cast<int>(var_of.size()) - 1));
      std::size_t j = static_cast<std::size_t>(uniform(0, static_cast<int>(var_of.size()) - 1));
      if (i == j) continue;
      int ci = uniform(0, static_cast<int>(var_of[i].size()) - 1);
      int cj = uniform(0, static_cast<int>(var_of[j].size()) - 1);
      merge(var_of[i][static_cast<std::size_t>(ci)], var_of[j][static_cast<std::size_t>(cj)]);
    }

    std::map<int, int> occurrences;
    for (const auto& columns : var_of) {
      for (int v : columns) ++occurrences[v];
    }
    ConjunctiveQuery query;
    std::set<int> used_vars;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      Atom atom;
      atom.relation = atoms[a]->name;
      for (std::size_t c = 0; c < var_of[a].size(); ++c) {
        int v = var_of[a][c];
        bool make_constant = occurrences[v] == 1 && uniform(0, 3) == 0;
        if (make_constant) {
          const auto& rows = db.tuples.at(atoms[a]->name);
          const AnnotatedTuple& sample =
              rows[static_cast<std::size_t>(uniform(0, static_cast<int>(rows.size()) - 1))];
          atom.terms.push_back(Term::constant(sample.values[c]));
        } else {
          atom.terms.push_back(Term::variable("x" + std::to_string(v)));
          used_vars.insert(v);
        }
      }
      query.body.push_back(std::move(atom));
    }
    std::vector<int> head_pool(used_vars.begin(), used_vars.end());
    if (head_pool.empty()) {
      // Force a variable so the query has a head.
      query.body[0].terms[0] = Term::variable("x0");
      head_pool.push_back(0);
    }
    int head_arity = std::min<int>(static_cast<int>(head_pool.size()), 1 + uniform(0, 1));
    for (int h = 0; h < head_arity; ++h) {
      query.head.push_back(Term::variable(
          "x" + std::to_string(head_pool[static_cast<std::size_t>(h)])));
    }
    query.validate();
    return query;
  }

  AbstractionTree make_tree(const KDatabase& db, const KExample& example) {
    std::vector<std::string> pool;
    std::set<std::string> example_annotations = var_set(example);
    for (const std::string& ann : example_annotations) pool.push_back(ann);
    std::vector<std::string> rest;
    for (const auto& [ann, tuple] : db.index) {
      (void)tuple;
      if (example_annotations.count(ann) == 0) rest.push_back(ann);
    }
    std::shuffle(rest.begin(), rest.end(), rng);
    for (const std::string& ann : rest) {
      if (static_cast<int>(pool.size()) >= spec.tree_leaf_count) break;
      pool.push_back(ann);
    }
    if (static_cast<int>(pool.size()) > spec.tree_leaf_count) {
      std::shuffle(pool.begin(), pool.end(), rng);
      pool.resize(static_cast<std::size_t>(spec.tree_leaf_count));
    }
    std::shuffle(pool.begin(), pool.end(), rng);

    std::vector<AbstractionTree::NodeSpec> specs;
    int counter = 0;
    specs.push_back({"n0", "", 1.0});
    build_subtree(pool, "n0", spec.tree_height, counter, specs);
    return AbstractionTree::build(specs);
  }

  void build_subtree(const std::vector<std::string>& leaves, const std::string& parent,
                     int remaining, int& counter,
                     std::vector<AbstractionTree::NodeSpec>& specs) {
    if (remaining == 1) {
      for (const std::string& leaf : leaves) specs.push_back({leaf, parent, 1.0});
      return;
    }
    int groups = std::min<int>(spec.branching, static_cast<int>(leaves.size()));
    groups = std::max(groups, 1);
    std::vector<std::vector<std::string>> parts(static_cast<std::size_t>(groups));
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      parts[i % static_cast<std::size_t>(groups)].push_back(leaves[i]);
    }
    for (const auto& part : parts) {
      if (part.empty()) continue;
      std::string label = "n" + std::to_string(++counter);
      specs.push_back({label, parent, 1.0});
      build_subtree(part, label, remaining - 1, counter, specs);
    }
  }
};

}  // namespace

Workload generate_workload(const WorkloadSpec& spec) {
  spec.validate();
  Generator gen(spec);
  Workload out;
  out.db = gen.make_database();

  constexpr int kQueryAttempts = 60;
  bool found = false;
  for (int attempt = 0; attempt < kQueryAttempts && !found; ++attempt) {
    ConjunctiveQuery query = gen.make_query(out.db);
    auto results = evaluate(query, out.db);
    if (static_cast<int>(results.size()) < spec.example_rows) continue;
    KExample example;
    example.output_arity = static_cast<int>(query.head.size());
    for (const auto& [output, polynomial] : results) {
      if (static_cast<int>(example.rows.size()) >= spec.example_rows) break;
      KExampleRow row;
      row.output = output;
      Monomial m;
      m.factors = polynomial.terms.begin()->first;
      row.provenance = m;
      example.rows.push_back(std::move(row));
    }
    example.validate();
    out.query = std::move(query);
    out.example = std::move(example);
    found = true;
  }
  if (!found) {
    throw Error(ErrorKind::InfeasibleSpec,
                "no generated query yielded " + std::to_string(spec.example_rows) +
                    " outputs after " + std::to_string(kQueryAttempts) + " attempts");
  }
  out.tree = gen.make_tree(out.db, out.example);
  return out;
}

}  // namespace provabs
