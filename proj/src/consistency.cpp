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

#include "provabs/consistency.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

namespace provabs {

int ConsistencyCache::intern(const ConjunctiveQuery& query) {
  std::string text = print_query(query);
  auto it = by_text_.find(text);
  if (it != by_text_.end()) return it->second;
  int id = static_cast<int>(store_.size());
  store_.push_back({query, is_connected_query(query)});
  by_text_.emplace(std::move(text), id);
  return id;
}

const std::vector<int>* ConsistencyCache::find_queries(const std::string& fingerprint) const {
  auto it = queries_.find(fingerprint);
  if (it == queries_.end()) {
    ++misses_;
    return nullptr;
  }
  ++hits_;
  return &it->second;
}

void ConsistencyCache::put_queries(const std::string& fingerprint, std::vector<int> ids) {
  queries_[fingerprint] = std::move(ids);
}

std::optional<bool> ConsistencyCache::find_connectivity(const std::string& fingerprint) const {
  auto it = connectivity_.find(fingerprint);
  if (it == connectivity_.end()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return it->second;
}

void ConsistencyCache::put_connectivity(const std::string& fingerprint, bool connected) {
  connectivity_[fingerprint] = connected;
}

namespace {

void append_escaped(std::ostringstream& out, const std::string& value) {
  // All separator characters are escaped so fingerprints stay injective for
  // arbitrary string values.
  for (char c : value) {
    if (c == '|' || c == '\\' || c == ';' || c == '>' || c == '^') out << '\\';
    out << c;
  }
}

}  // namespace

std::string row_fingerprint(const KExampleRow& row) {
  std::ostringstream out;
  for (const std::string& value : row.output) {
    out << '|';
    append_escaped(out, value);
  }
  out << '>';
  for (const auto& [label, power] : row.provenance.factors) {
    out << '|';
    append_escaped(out, label);
    out << '^' << power;
  }
  return out.str();
}

std::string example_fingerprint(const KExample& example) {
  std::ostringstream out;
  out << example.output_arity;
  for (const KExampleRow& row : example.rows) {
    out << ';' << row_fingerprint(row);
  }
  return out.str();
}

bool row_is_connected(const KExampleRow& row, const KDatabase& db, ConsistencyCache* cache) {
  std::string fp;
  if (cache != nullptr) {
    fp = row_fingerprint(row);
    if (auto memo = cache->find_connectivity(fp)) return *memo;
  }
  std::vector<const AnnotatedTuple*> tuples;
  for (const auto& [annotation, power] : row.provenance.factors) {
    (void)power;
    tuples.push_back(&db.require(annotation));
  }
  bool connected = true;
  if (tuples.size() > 1) {
    std::vector<std::set<std::string>> values(tuples.size());
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      values[i].insert(tuples[i]->values.begin(), tuples[i]->values.end());
    }
    std::vector<bool> seen(tuples.size(), false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
      std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t other = 0; other < tuples.size(); ++other) {
        if (seen[other]) continue;
        bool shares = std::any_of(values[node].begin(), values[node].end(),
                                  [&](const std::string& v) { return values[other].count(v) != 0; });
        if (shares) {
          seen[other] = true;
          ++reached;
          stack.push_back(other);
        }
      }
    }
    connected = reached == tuples.size();
  }
  if (cache != nullptr) cache->put_connectivity(fp, connected);
  return connected;
}

bool concretization_is_connected(const Concretization& c, const KDatabase& db,
                                 ConsistencyCache* cache) {
  if (c.connected.has_value()) return *c.connected;
  bool connected = true;
  for (const KExampleRow& row : c.example.rows) {
    if (!row_is_connected(row, db, cache)) {
      connected = false;
      break;
    }
  }
  c.connected = connected;
  return connected;
}

std::optional<ConjunctiveQuery> anti_unify(
    const std::vector<std::string>& slot_relations,
    const std::vector<std::vector<const AnnotatedTuple*>>& aligned_rows,
    const std::vector<std::vector<std::string>>& outputs) {
  std::size_t slots = slot_relations.size();
  std::size_t rows = aligned_rows.size();
  // Value vector across rows per (slot, column) position; identical vectors
  // form one variable class, all-equal vectors become constants.
  std::map<std::vector<std::string>, std::string> classes;
  int next_var = 0;
  auto term_for = [&](const std::vector<std::string>& key) -> Term {
    bool constant = std::all_of(key.begin(), key.end(),
                                [&](const std::string& v) { return v == key.front(); });
    if (constant) return Term::constant(key.front());
    auto it = classes.find(key);
    if (it == classes.end()) {
      it = classes.emplace(key, "v" + std::to_string(next_var++)).first;
    }
    return Term::variable(it->second);
  };

  ConjunctiveQuery query;
  for (std::size_t s = 0; s < slots; ++s) {
    Atom atom;
    atom.relation = slot_relations[s];
    std::size_t arity = aligned_rows[0][s]->values.size();
    for (std::size_t col = 0; col < arity; ++col) {
      std::vector<std::string> key(rows);
      for (std::size_t r = 0; r < rows; ++r) key[r] = aligned_rows[r][s]->values[col];
      atom.terms.push_back(term_for(key));
    }
    query.body.push_back(std::move(atom));
  }
  std::size_t out_arity = outputs[0].size();
  for (std::size_t j = 0; j < out_arity; ++j) {
    std::vector<std::string> key(rows);
    for (std::size_t r = 0; r < rows; ++r) key[r] = outputs[r][j];
    bool constant = std::all_of(key.begin(), key.end(),
                                [&](const std::string& v) { return v == key.front(); });
    if (constant) {
      query.head.push_back(Term::constant(key.front()));
      continue;
    }
    auto it = classes.find(key);
    if (it == classes.end()) return std::nullopt;  // output column not covered
    query.head.push_back(Term::variable(it->second));
  }
  return query;
}

namespace {

struct ExpandedRow {
  // Occurrences in canonical order, one entry per power repetition.
  std::vector<const AnnotatedTuple*> tuples;
  std::vector<std::string> output;
};

ExpandedRow expand_row(const KExampleRow& row, const KDatabase& db) {
  ExpandedRow out;
  out.output = row.output;
  for (const auto& [annotation, power] : row.provenance.factors) {
    const AnnotatedTuple* tuple = &db.require(annotation);
    for (int i = 0; i < power; ++i) out.tuples.push_back(tuple);
  }
  return out;
}

long long saturating_multiply(long long a, long long b) {
  constexpr long long kMax = std::numeric_limits<long long>::max();
  if (a == 0 || b == 0) return 0;
  if (a > kMax / b) return kMax;
  return a * b;
}

// Distinct permutations of a sorted multiset: n! / prod(run!), saturating.
// Duplicates are repeated powers of the same tuple, so pointer equality is
// exact.
long long distinct_permutations(const std::vector<const AnnotatedTuple*>& sorted_group) {
  long long count = 1;
  for (long long n = 2; n <= static_cast<long long>(sorted_group.size()); ++n) {
    count = saturating_multiply(count, n);
  }
  long long divisor = 1;
  std::size_t i = 0;
  while (i < sorted_group.size()) {
    std::size_t j = i + 1;
    while (j < sorted_group.size() && sorted_group[j] == sorted_group[i]) ++j;
    for (long long f = 2; f <= static_cast<long long>(j - i); ++f) {
      divisor = saturating_multiply(divisor, f);
    }
    i = j;
  }
  return count / divisor;
}

// Per (row >= 1, relation) group: the sorted tuple list to permute against the
// first row's slot positions of that relation.
struct AlignmentGroup {
  std::size_t row;                      // index into aligned_rows
  std::vector<std::size_t> slot_positions;
  std::vector<const AnnotatedTuple*> tuples;  // sorted by annotation
};

void enumerate_alignments(std::vector<AlignmentGroup>& groups, std::size_t group_index,
                          std::vector<std::vector<const AnnotatedTuple*>>& matrix,
                          const std::vector<std::string>& slot_relations,
                          const std::vector<std::vector<std::string>>& outputs,
                          std::vector<ConjunctiveQuery>& found) {
  if (group_index == groups.size()) {
    if (auto q = anti_unify(slot_relations, matrix, outputs)) {
      found.push_back(std::move(*q));
    }
    return;
  }
  AlignmentGroup& group = groups[group_index];
  std::vector<const AnnotatedTuple*>& perm = group.tuples;
  std::sort(perm.begin(), perm.end(), [](const AnnotatedTuple* a, const AnnotatedTuple* b) {
    return a->annotation < b->annotation;
  });
  do {
    for (std::size_t i = 0; i < perm.size(); ++i) {
      matrix[group.row][group.slot_positions[i]] = perm[i];
    }
    enumerate_alignments(groups, group_index + 1, matrix, slot_relations, outputs, found);
  } while (std::next_permutation(perm.begin(), perm.end(),
                                 [](const AnnotatedTuple* a, const AnnotatedTuple* b) {
                                   return a->annotation < b->annotation;
                                 }));
}

}  // namespace

std::vector<ConjunctiveQuery> consistent_queries(const KExample& concrete, const KDatabase& db,
                                                 ConsistencyCache* cache,
                                                 const ConsistencyConfig& cfg) {
  std::string fp;
  if (cache != nullptr) {
    fp = example_fingerprint(concrete);
    if (const std::vector<int>* ids = cache->find_queries(fp)) {
      std::vector<ConjunctiveQuery> out;
      out.reserve(ids->size());
      for (int id : *ids) out.push_back(cache->stored(id).query);
      return out;
    }
  }

  std::vector<ConjunctiveQuery> result;
  if (!concrete.rows.empty()) {
    std::vector<ExpandedRow> rows;
    rows.reserve(concrete.rows.size());
    for (const KExampleRow& row : concrete.rows) rows.push_back(expand_row(row, db));

    // First row fixes the slot skeleton.
    std::vector<std::string> slot_relations;
    std::map<std::string, std::vector<std::size_t>> positions_by_relation;
    for (std::size_t s = 0; s < rows[0].tuples.size(); ++s) {
      slot_relations.push_back(rows[0].tuples[s]->relation);
      positions_by_relation[rows[0].tuples[s]->relation].push_back(s);
    }

    bool aligned = true;
    std::vector<AlignmentGroup> groups;
    long long alignment_count = 1;
    for (std::size_t r = 1; r < rows.size() && aligned; ++r) {
      std::map<std::string, std::vector<const AnnotatedTuple*>> by_relation;
      for (const AnnotatedTuple* tuple : rows[r].tuples) {
        by_relation[tuple->relation].push_back(tuple);
      }
      if (by_relation.size() != positions_by_relation.size()) {
        aligned = false;
        break;
      }
      for (auto& [relation, tuples] : by_relation) {
        auto it = positions_by_relation.find(relation);
        if (it == positions_by_relation.end() || it->second.size() != tuples.size()) {
          aligned = false;
          break;
        }
        AlignmentGroup group;
        group.row = r;
        group.slot_positions = it->second;
        group.tuples = tuples;
        std::sort(group.tuples.begin(), group.tuples.end(),
                  [](const AnnotatedTuple* a, const AnnotatedTuple* b) {
                    return a->annotation < b->annotation;
                  });
        alignment_count = saturating_multiply(alignment_count,
                                              distinct_permutations(group.tuples));
        groups.push_back(std::move(group));
      }
    }

    if (aligned) {
      if (alignment_count > cfg.max_alignments) {
        throw Error(ErrorKind::AlignmentExplosion,
                    std::to_string(alignment_count) + " alignments exceed cap " +
                        std::to_string(cfg.max_alignments),
                    alignment_count);
      }
      std::vector<std::vector<const AnnotatedTuple*>> matrix(rows.size());
      matrix[0] = rows[0].tuples;
      for (std::size_t r = 1; r < rows.size(); ++r) matrix[r].resize(rows[0].tuples.size());
      std::vector<std::vector<std::string>> outputs;
      outputs.reserve(rows.size());
      for (const ExpandedRow& row : rows) outputs.push_back(row.output);

      std::vector<ConjunctiveQuery> found;
      enumerate_alignments(groups, 0, matrix, slot_relations, outputs, found);

      // Dedupe: printed-text fast path, then homomorphic equivalence.
      std::set<std::string> seen_text;
      for (ConjunctiveQuery& q : found) {
        if (!seen_text.insert(print_query(q)).second) continue;
        bool duplicate = std::any_of(result.begin(), result.end(), [&](const ConjunctiveQuery& r) {
          return equivalent(r, q);
        });
        if (!duplicate) result.push_back(std::move(q));
      }
      std::sort(result.begin(), result.end(),
                [](const ConjunctiveQuery& a, const ConjunctiveQuery& b) {
                  return print_query(a) < print_query(b);
                });
    }
  }

  if (cache != nullptr) {
    std::vector<int> ids;
    ids.reserve(result.size());
    for (const ConjunctiveQuery& q : result) ids.push_back(cache->intern(q));
    cache->put_queries(fp, std::move(ids));
  }
  return result;
}

std::vector<ConjunctiveQuery> consistent_queries(const Concretization& c, const KDatabase& db,
                                                 ConsistencyCache* cache,
                                                 const ConsistencyConfig& cfg) {
  return consistent_queries(c.example, db, cache, cfg);
}

KDatabase induced_database(const KExample& concrete, const KDatabase& db) {
  KDatabase out;
  out.relations = db.relations;
  for (const KExampleRow& row : concrete.rows) {
    for (const auto& [annotation, power] : row.provenance.factors) {
      (void)power;
      if (out.index.count(annotation) != 0) continue;
      const AnnotatedTuple& tuple = db.require(annotation);
      out.tuples[tuple.relation].push_back(tuple);
      out.index.emplace(annotation, tuple);
    }
  }
  return out;
}

bool is_consistent(const ConjunctiveQuery& query, const KExample& concrete, const KDatabase& db) {
  if (static_cast<int>(query.head.size()) != concrete.output_arity) {
    throw Error(ErrorKind::InvalidArgument,
                "query head arity does not match the example's output arity");
  }
  KDatabase instance = induced_database(concrete, db);
  auto results = evaluate(query, instance);
  for (const KExampleRow& row : concrete.rows) {
    auto it = results.find(row.output);
    if (it == results.end()) return false;
    Monomial witness = row.provenance;
    witness.coefficient = 1;
    if (!it->second.contains(witness)) return false;
  }
  return true;
}

bool is_consistent(const ConjunctiveQuery& query, const Concretization& c, const KDatabase& db) {
  return is_consistent(query, c.example, db);
}

}  // namespace provabs
