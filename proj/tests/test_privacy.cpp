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

#include <doctest.h>

#include <algorithm>
#include <random>

#include "support.hpp"

using namespace provabs;
using namespace provabs::testing;

namespace {

PrivacyOutcome run(const KExample& abstracted, int k, ConsistencyCache* cache = nullptr,
                   PrivacyConfig base = PrivacyConfig{}) {
  base.k = k;
  ConsistencyCache local;
  return compute_privacy(AbstractedKExample{abstracted, std::nullopt}, running_tree(),
                         running_db(), base, cache != nullptr ? cache : &local);
}

// Reference computation: full materialization, no filters, no cache.
PrivacyOutcome reference(const KExample& abstracted, int k, const AbstractionTree& tree,
                         const KDatabase& db, CimDef def = CimDef::Algorithmic) {
  PrivacyConfig cfg;
  cfg.k = k;
  cfg.cim_def = def;
  cfg.row_by_row = false;
  cfg.connectivity_filter = false;
  cfg.use_cache = false;
  return compute_privacy(AbstractedKExample{abstracted, std::nullopt}, tree, db, cfg, nullptr);
}

}  // namespace

TEST_CASE("privacy of ex_abs1 is 2 with the expected CIM set") {
  PrivacyOutcome outcome = run(ex_abs1(), 2);
  CHECK_FALSE(outcome.below_threshold);
  CHECK(outcome.privacy == 2);
  CHECK(same_query_set(outcome.cim, {q_real(), q_false1()}));
}

TEST_CASE("privacy of ex_abs3 fails the threshold with Q_real surviving") {
  PrivacyOutcome outcome = run(ex_abs3(), 2);
  CHECK(outcome.below_threshold);
  REQUIRE(outcome.cim.size() == 1);
  CHECK(equivalent(outcome.cim[0], q_real()));
}

TEST_CASE("privacy of ex_abs2 is 2 with Q_real and Q_false2") {
  PrivacyOutcome outcome = run(ex_abs2(), 2);
  CHECK_FALSE(outcome.below_threshold);
  CHECK(outcome.privacy == 2);
  CHECK(same_query_set(outcome.cim, {q_real(), q_false2()}));
}

TEST_CASE("the identity abstraction keeps the real query as a CIM") {
  PrivacyOutcome outcome = run(ex_real(), 1);
  CHECK_FALSE(outcome.below_threshold);
  CHECK(outcome.privacy >= 1);
  CHECK(set_contains(outcome.cim, q_real()));
  // Reference computation agrees.
  PrivacyOutcome ref = reference(ex_real(), 1, running_tree(), running_db());
  CHECK(ref.privacy == outcome.privacy);
  CHECK(same_query_set(ref.cim, outcome.cim));
}

TEST_CASE("get_minimal_queries") {
  CHECK(same_query_set(get_minimal_queries({q_real(), q_general()}), {q_real()}));
  CHECK(same_query_set(get_minimal_queries({q_real()}), {q_real()}));
  CHECK(same_query_set(get_minimal_queries({q_real(), q_false1()}), {q_real(), q_false1()}));
  // Equivalence duplicates collapse before minimality.
  ConjunctiveQuery renamed = parse_query(
      "Q(a) :- Persons(a,b,c), Hobbies(a,'Dance',d), Interests(a,'Music',e)");
  CHECK(get_minimal_queries({q_real(), renamed}).size() == 1);
}

TEST_CASE("threshold must be positive") {
  CHECK_THROWS_AS((void)run(ex_abs1(), 0), Error);
}

TEST_CASE("row-by-row agrees with full materialization on the running example") {
  AbstractionTree tree = running_tree();
  KDatabase db = running_db();
  for (const KExample& abstracted : {ex_abs1(), ex_abs2(), ex_abs3(), ex_real()}) {
    for (int k : {1, 2, 3}) {
      PrivacyOutcome fast = run(abstracted, k);
      PrivacyOutcome slow = reference(abstracted, k, tree, db);
      CHECK(fast.below_threshold == slow.below_threshold);
      if (!fast.below_threshold) {
        CHECK(fast.privacy == slow.privacy);
        CHECK(same_query_set(fast.cim, slow.cim));
      }
    }
  }
}

TEST_CASE("row-by-row agrees with full materialization on generated 3-row instances") {
  for (unsigned seed = 1; seed <= 12; ++seed) {
    WorkloadSpec spec;
    spec.relation_count = 2;
    spec.tuples_per_relation = 6;
    spec.domain_size = 4;
    spec.tree_leaf_count = 8;
    spec.tree_height = 2;
    spec.branching = 3;
    spec.query_atom_count = 2;
    spec.join_count = 1;
    spec.example_rows = 3;
    spec.seed = seed;
    Workload w;
    try {
      w = generate_workload(spec);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::InfeasibleSpec) continue;
      throw;
    }
    // Abstract one occurrence of each row when possible (first in-tree leaf).
    AbstractionChoice choice;
    for (const Occurrence& occ : occurrences_of(w.example)) {
      if (!w.tree.has_node(occ.label) || !w.tree.is_leaf(occ.label)) continue;
      bool row_done = std::any_of(choice.assignments.begin(), choice.assignments.end(),
                                  [&](const auto& kv) { return kv.first.row == occ.key.row; });
      if (row_done) continue;
      choice.assignments[occ.key] = w.tree.parent(occ.label);
    }
    AbstractedKExample abstracted = apply_abstraction(choice, w.example, w.tree);
    for (int k : {1, 2}) {
      PrivacyConfig cfg;
      cfg.k = k;
      ConsistencyCache cache;
      PrivacyOutcome fast = compute_privacy(abstracted, w.tree, w.db, cfg, &cache);
      PrivacyOutcome slow = reference(abstracted.example, k, w.tree, w.db);
      INFO("seed ", seed, " k ", k);
      CHECK(fast.below_threshold == slow.below_threshold);
      if (!fast.below_threshold && !slow.below_threshold) {
        CHECK(fast.privacy == slow.privacy);
        CHECK(same_query_set(fast.cim, slow.cim));
      }
    }
  }
}

TEST_CASE("row order does not change the final outcome on 3-row instances") {
  for (unsigned seed = 20; seed <= 28; ++seed) {
    WorkloadSpec spec;
    spec.relation_count = 2;
    spec.tuples_per_relation = 6;
    spec.domain_size = 4;
    spec.tree_leaf_count = 8;
    spec.tree_height = 2;
    spec.query_atom_count = 2;
    spec.join_count = 1;
    spec.example_rows = 3;
    spec.seed = seed;
    Workload w;
    try {
      w = generate_workload(spec);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::InfeasibleSpec) continue;
      throw;
    }
    AbstractionChoice choice;
    for (const Occurrence& occ : occurrences_of(w.example)) {
      if (w.tree.has_node(occ.label) && w.tree.is_leaf(occ.label)) {
        choice.assignments[occ.key] = w.tree.parent(occ.label);
        break;  // a single abstracted occurrence keeps the space small
      }
    }
    AbstractedKExample abstracted = apply_abstraction(choice, w.example, w.tree);

    PrivacyConfig cfg;
    cfg.k = 1;
    ConsistencyCache cache1;
    PrivacyOutcome base = compute_privacy(abstracted, w.tree, w.db, cfg, &cache1);

    // Swap rows 2 and 3 (the first row stays the bootstrap row).
    AbstractedKExample permuted = abstracted;
    std::swap(permuted.example.rows[1], permuted.example.rows[2]);
    ConsistencyCache cache2;
    PrivacyOutcome swapped = compute_privacy(permuted, w.tree, w.db, cfg, &cache2);

    INFO("seed ", seed);
    CHECK(base.below_threshold == swapped.below_threshold);
    if (!base.below_threshold && !swapped.below_threshold) {
      CHECK(base.privacy == swapped.privacy);
      CHECK(same_query_set(base.cim, swapped.cim));
    }
  }
}

TEST_CASE("trivial-query exclusion drops zero-variable CIM candidates") {
  KDatabase db = running_db();
  AbstractionTree tree = running_tree();
  // Single-row example over one tuple: the only candidate is the constant
  // single-atom query, which is connected but has no variables.
  KExample ex;
  ex.output_arity = 1;
  ex.rows.push_back(row({"1"}, {{"h1", 1}}));

  PrivacyConfig plain;
  plain.k = 1;
  ConsistencyCache cache;
  PrivacyOutcome with_trivial =
      compute_privacy(AbstractedKExample{ex, std::nullopt}, tree, db, plain, &cache);
  CHECK_FALSE(with_trivial.below_threshold);
  CHECK(with_trivial.privacy == 1);
  CHECK(with_trivial.cim[0].variable_count() == 0);

  PrivacyConfig excluding = plain;
  excluding.trivial_exclusion = true;
  PrivacyOutcome without =
      compute_privacy(AbstractedKExample{ex, std::nullopt}, tree, db, excluding, &cache);
  CHECK(without.below_threshold);
}

TEST_CASE("strict CIM definition blocks via disconnected-concretization queries") {
  // Algorithmic and strict agree on the running example abstractions.
  AbstractionTree tree = running_tree();
  KDatabase db = running_db();
  for (const KExample& abstracted : {ex_abs1(), ex_abs3()}) {
    PrivacyOutcome algorithmic = reference(abstracted, 1, tree, db, CimDef::Algorithmic);
    PrivacyOutcome strict = reference(abstracted, 1, tree, db, CimDef::Strict);
    CHECK(algorithmic.below_threshold == strict.below_threshold);
    if (!algorithmic.below_threshold) {
      CHECK(strict.privacy <= algorithmic.privacy);
      for (const ConjunctiveQuery& q : strict.cim) {
        CHECK(set_contains(algorithmic.cim, q));
      }
    }
  }
}

TEST_CASE("every returned CIM member is connected and witnessed") {
  KDatabase db = running_db();
  AbstractionTree tree = running_tree();
  PrivacyOutcome outcome = run(ex_abs1(), 1);
  for (const ConjunctiveQuery& q : outcome.cim) {
    CHECK(is_connected_query(q));
    bool witnessed = false;
    auto all = enumerate_concretizations(AbstractedKExample{ex_abs1(), std::nullopt}, tree, db,
                                         std::nullopt, 1000);
    for (const Concretization& c : all) {
      ConsistencyCache cache;
      if (concretization_is_connected(c, db, &cache) && is_consistent(q, c, db)) {
        witnessed = true;
        break;
      }
    }
    CHECK(witnessed);
  }
}
