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

#ifndef PROVABS_CONSISTENCY_HPP
#define PROVABS_CONSISTENCY_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "provabs/abstraction.hpp"
#include "provabs/query.hpp"

namespace provabs {

struct ConsistencyConfig {
  long long max_alignments = 10000;
};

// Memo shared across privacy computations: canonical fingerprints of concrete
// (prefix) examples map to the consistent queries found for them and to row
// connectivity verdicts. Queries are interned by printed text and carry their
// connectivity flag.
class ConsistencyCache {
 public:
  struct StoredQuery {
    ConjunctiveQuery query;
    bool connected = false;
  };

  int intern(const ConjunctiveQuery& query);
  const StoredQuery& stored(int id) const { return store_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return store_.size(); }

  const std::vector<int>* find_queries(const std::string& fingerprint) const;
  void put_queries(const std::string& fingerprint, std::vector<int> ids);

  std::optional<bool> find_connectivity(const std::string& fingerprint) const;
  void put_connectivity(const std::string& fingerprint, bool connected);

  long long hits() const { return hits_; }
  long long misses() const { return misses_; }

 private:
  std::vector<StoredQuery> store_;
  std::map<std::string, int> by_text_;
  std::map<std::string, std::vector<int>> queries_;
  std::map<std::string, bool> connectivity_;
  mutable long long hits_ = 0;
  mutable long long misses_ = 0;
};

// Canonical fingerprints: output values plus the sorted factor sequence of
// every row, injective on canonicalized examples.
std::string row_fingerprint(const KExampleRow& row);
std::string example_fingerprint(const KExample& example);

// Tuple graph of one row: distinct tuples as nodes, an edge whenever two
// tuples share any constant value. Connected rows are a necessary condition
// for connected consistent queries.
bool row_is_connected(const KExampleRow& row, const KDatabase& db, ConsistencyCache* cache);
bool concretization_is_connected(const Concretization& c, const KDatabase& db,
                                 ConsistencyCache* cache);

// Anti-unification (least general generalization) of aligned rows. Slot i of
// every row holds one tuple; a position becomes a constant when all rows
// agree, positions share a variable when they hold equal values within every
// row. Returns nothing when some output column is not covered.
std::optional<ConjunctiveQuery> anti_unify(
    const std::vector<std::string>& slot_relations,
    const std::vector<std::vector<const AnnotatedTuple*>>& aligned_rows,
    const std::vector<std::vector<std::string>>& outputs);

// Most-specific consistent queries of a concrete example: one anti-unification
// per relation-respecting alignment of every row against the first row's slot
// skeleton, deduplicated by homomorphic equivalence. Every consistent query
// generalizes one of these. Empty when the rows' relation skeletons differ.
// Throws Error{AlignmentExplosion} past cfg.max_alignments.
std::vector<ConjunctiveQuery> consistent_queries(const KExample& concrete, const KDatabase& db,
                                                 ConsistencyCache* cache,
                                                 const ConsistencyConfig& cfg);
std::vector<ConjunctiveQuery> consistent_queries(const Concretization& c, const KDatabase& db,
                                                 ConsistencyCache* cache,
                                                 const ConsistencyConfig& cfg);

// Definition-level consistency check, used as the independent oracle: the
// query must derive every row's output with exactly the row's monomial over
// the example's own induced database.
bool is_consistent(const ConjunctiveQuery& query, const KExample& concrete, const KDatabase& db);
bool is_consistent(const ConjunctiveQuery& query, const Concretization& c, const KDatabase& db);

// Database induced by the example's provenance annotations.
KDatabase induced_database(const KExample& concrete, const KDatabase& db);

}  // namespace provabs

#endif  // PROVABS_CONSISTENCY_HPP
