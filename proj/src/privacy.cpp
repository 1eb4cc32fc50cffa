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

#include "provabs/privacy.hpp"

#include <algorithm>
#include <set>

namespace provabs {

namespace {

// A good concretization prefix: the first rows fully concretized.
struct Prefix {
  std::vector<KExampleRow> rows;
};

// One equivalence class of candidate queries. Connectivity is a property of
// the syntactic form, not the class: a disconnected anti-unification can be
// equivalent to a connected one (a join carried by constants in one form,
// by a shared variable in the other). The class counts as connected when any
// witnessed form is, and keeps a connected representative.
struct CandidateQuery {
  ConjunctiveQuery query;
  bool connected = false;
  std::vector<std::size_t> witnesses;  // indices into the prefix list
};

// Selects CIM queries: candidates from the connected set (optionally without
// zero-variable queries), blocked by any strictly contained member of the
// blocker set.
std::vector<ConjunctiveQuery> select_cim(const std::vector<const ConjunctiveQuery*>& candidates,
                                         const std::vector<const ConjunctiveQuery*>& blockers,
                                         bool trivial_exclusion) {
  std::vector<ConjunctiveQuery> out;
  for (const ConjunctiveQuery* candidate : candidates) {
    if (trivial_exclusion && candidate->variable_count() == 0) continue;
    bool minimal = true;
    for (const ConjunctiveQuery* blocker : blockers) {
      if (blocker == candidate) continue;
      if (contains(*candidate, *blocker) && !equivalent(*candidate, *blocker)) {
        minimal = false;
        break;
      }
    }
    if (minimal) out.push_back(*candidate);
  }
  return out;
}

}  // namespace

std::vector<ConjunctiveQuery> get_minimal_queries(const std::vector<ConjunctiveQuery>& queries) {
  std::vector<ConjunctiveQuery> reps;
  for (const ConjunctiveQuery& q : queries) {
    bool duplicate = std::any_of(reps.begin(), reps.end(), [&](const ConjunctiveQuery& r) {
      return equivalent(r, q);
    });
    if (!duplicate) reps.push_back(q);
  }
  std::vector<const ConjunctiveQuery*> pointers;
  pointers.reserve(reps.size());
  for (const ConjunctiveQuery& q : reps) pointers.push_back(&q);
  return select_cim(pointers, pointers, false);
}

PrivacyOutcome compute_privacy(const AbstractedKExample& abstracted, const AbstractionTree& tree,
                               const KDatabase& db, const PrivacyConfig& cfg,
                               ConsistencyCache* cache) {
  if (cfg.k < 1) {
    throw Error(ErrorKind::InvalidArgument, "privacy threshold must be at least 1");
  }
  const std::vector<KExampleRow>& rows = abstracted.example.rows;
  PrivacyOutcome outcome;
  if (rows.empty()) {
    outcome.below_threshold = true;
    outcome.failed_at_row = 0;
    return outcome;
  }

  ConsistencyCache* memo = cfg.use_cache ? cache : nullptr;
  ConsistencyConfig ccfg{cfg.max_alignments};

  // Strict minimality needs the consistent queries of disconnected
  // concretizations as blockers, which only a full materialization provides.
  bool row_by_row = cfg.row_by_row && cfg.cim_def == CimDef::Algorithmic;
  bool connectivity_filter = cfg.connectivity_filter && cfg.cim_def == CimDef::Algorithmic;

  // Row batches: the first iteration bootstraps from the first two rows
  // (or the single row), later iterations add one row each.
  std::vector<std::pair<std::size_t, std::size_t>> batches;
  if (row_by_row) {
    std::size_t first = std::min<std::size_t>(rows.size(), 2);
    batches.emplace_back(0, first);
    for (std::size_t i = first; i < rows.size(); ++i) batches.emplace_back(i, i + 1);
  } else {
    batches.emplace_back(0, rows.size());
  }

  std::vector<Prefix> prefixes{Prefix{}};
  std::vector<ConjunctiveQuery> cim;

  for (const auto& [batch_begin, batch_end] : batches) {
    // Expand every good prefix by the batch rows' concretization options.
    std::vector<long long> option_counts;
    for (std::size_t r = batch_begin; r < batch_end; ++r) {
      option_counts.push_back(row_concretization_count(rows[r], tree));
    }
    std::vector<Prefix> expanded;
    std::set<std::string> seen;
    for (const Prefix& prefix : prefixes) {
      std::vector<long long> odometer(option_counts.size(), 0);
      while (true) {
        if (++outcome.concretizations_expanded > cfg.max_concretizations) {
          throw Error(ErrorKind::CapExceeded,
                      "privacy computation exceeded the concretization cap " +
                          std::to_string(cfg.max_concretizations),
                      outcome.concretizations_expanded);
        }
        Prefix next = prefix;
        bool rows_ok = true;
        for (std::size_t i = 0; i < odometer.size(); ++i) {
          KExampleRow concrete = concretize_row(rows[batch_begin + i], tree, odometer[i]);
          if (connectivity_filter && !row_is_connected(concrete, db, memo)) {
            rows_ok = false;
            break;
          }
          next.rows.push_back(std::move(concrete));
        }
        if (rows_ok) {
          KExample as_example{abstracted.example.output_arity, next.rows};
          if (seen.insert(example_fingerprint(as_example)).second) {
            expanded.push_back(std::move(next));
          }
        }
        std::size_t i = odometer.size();
        bool advanced = false;
        while (i-- > 0) {
          if (++odometer[i] < option_counts[i]) {
            advanced = true;
            break;
          }
          odometer[i] = 0;
        }
        if (!advanced) break;
      }
    }

    // Consistent queries per surviving concretization, deduped by
    // homomorphic equivalence across the whole batch.
    std::vector<CandidateQuery> candidates;
    for (std::size_t p = 0; p < expanded.size(); ++p) {
      KExample as_example{abstracted.example.output_arity, expanded[p].rows};
      std::vector<ConjunctiveQuery> qs = consistent_queries(as_example, db, memo, ccfg);
      for (ConjunctiveQuery& q : qs) {
        auto match = std::find_if(candidates.begin(), candidates.end(),
                                  [&](const CandidateQuery& c) { return equivalent(c.query, q); });
        if (match == candidates.end()) {
          CandidateQuery c;
          c.connected = is_connected_query(q);
          c.query = std::move(q);
          c.witnesses.push_back(p);
          candidates.push_back(std::move(c));
        } else {
          match->witnesses.push_back(p);
          if (!match->connected && is_connected_query(q)) {
            match->connected = true;
            match->query = std::move(q);
          }
        }
      }
    }

    // Good concretizations: prefixes admitting some consistent query. Pruning
    // on connectivity of the prefix queries would be unsound: a join carried
    // by a constant shared across the prefix rows can turn into a shared
    // variable once a later row breaks the agreement, connecting the query.
    // Consistency itself is row-monotone, so this filter is exact.
    std::set<std::size_t> good;
    for (const CandidateQuery& c : candidates) {
      good.insert(c.witnesses.begin(), c.witnesses.end());
    }
    std::vector<Prefix> next_prefixes;
    next_prefixes.reserve(good.size());
    for (std::size_t p : good) next_prefixes.push_back(std::move(expanded[p]));
    prefixes = std::move(next_prefixes);

    bool final_batch = batch_end == rows.size();
    if (prefixes.empty()) {
      // No extension can admit a consistent query: privacy is 0.
      outcome.below_threshold = true;
      outcome.failed_at_row = static_cast<int>(batch_end);
      outcome.cim.clear();
      return outcome;
    }
    if (!final_batch) continue;

    std::vector<const ConjunctiveQuery*> connected;
    std::vector<const ConjunctiveQuery*> blockers;
    for (const CandidateQuery& c : candidates) {
      if (c.connected) connected.push_back(&c.query);
      if (cfg.cim_def == CimDef::Strict || c.connected) blockers.push_back(&c.query);
    }

    if (static_cast<int>(connected.size()) < cfg.k) {
      outcome.below_threshold = true;
      outcome.failed_at_row = static_cast<int>(batch_end);
      outcome.cim = select_cim(connected, blockers, cfg.trivial_exclusion);
      return outcome;
    }

    cim = select_cim(connected, blockers, cfg.trivial_exclusion);
    if (static_cast<int>(cim.size()) < cfg.k) {
      outcome.below_threshold = true;
      outcome.failed_at_row = static_cast<int>(batch_end);
      outcome.cim = std::move(cim);
      return outcome;
    }
  }

  outcome.privacy = static_cast<int>(cim.size());
  outcome.cim = std::move(cim);
  return outcome;
}

}  // namespace provabs
