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

#ifndef PROVABS_OPTIMIZER_HPP
#define PROVABS_OPTIMIZER_HPP

#include "provabs/privacy.hpp"

namespace provabs {

enum class SearchMode { Primal, Dual };

struct SearchToggles {
  bool sort_choices = true;
  bool loi_first = true;
  bool row_by_row = true;
  bool connectivity_filter = true;
  bool caching = true;
};

struct OptimizerCaps {
  long long max_abstractions = 200000;
  long long max_concretizations = 100000;
  long long max_alignments = 10000;
};

struct OptimizerConfig {
  SearchMode mode = SearchMode::Primal;
  int k = 1;            // primal: privacy threshold
  double loi_max = 0;   // dual: loss budget
  LossModel loss;
  OptimizerCaps caps;
  SearchToggles toggles;
  CimDef cim_def = CimDef::Algorithmic;
  bool trivial_exclusion = false;
  unsigned seed = 0;  // echoed into reports; the search itself is deterministic

  PrivacyConfig privacy_config(int threshold) const;
};

struct SearchStats {
  long long choices_examined = 0;
  long long privacy_calls = 0;
  long long cache_hits = 0;
  long long cap_skips = 0;
  double elapsed_seconds = 0;
};

struct SearchResult {
  AbstractionChoice choice;
  AbstractedKExample abstracted;
  double loi = 0;
  int privacy = 0;
  std::vector<ConjunctiveQuery> cim;
};

struct SearchOutcome {
  std::optional<SearchResult> best;
  // True when a cap prevented certifying optimality: the choice stream was
  // truncated, or a choice that could still have improved the result was
  // skipped after exceeding a per-choice cap.
  bool incomplete = false;
  SearchStats stats;
};

// Sorted scan over abstraction choices; computes the loss first and the
// privacy only for choices that would improve on the best so far. Returns the
// minimum-loss choice with privacy >= k.
SearchOutcome find_optimal_abstraction(const KExample& example, const AbstractionTree& tree,
                                       const KDatabase& db, const OptimizerConfig& cfg);

// Dual search: among choices with loss <= cfg.loi_max, returns the one
// maximizing privacy; ties broken by smaller loss, then scan order.
SearchOutcome find_max_privacy(const KExample& example, const AbstractionTree& tree,
                               const KDatabase& db, const OptimizerConfig& cfg);

// Correctness oracle: materializes every choice and computes full privacy per
// choice with no row-by-row pruning, no connectivity filtering and no caching.
// Throws Error{CapExceeded} when the choice space exceeds the cap.
SearchOutcome brute_force_optimal(const KExample& example, const AbstractionTree& tree,
                                  const KDatabase& db, const OptimizerConfig& cfg);

// Runs the optimizer with the given toggle set; toggles affect cost, never
// the optimum.
SearchOutcome ablation_run(const KExample& example, const AbstractionTree& tree,
                           const KDatabase& db, OptimizerConfig cfg,
                           const SearchToggles& toggles);

}  // namespace provabs

#endif  // PROVABS_OPTIMIZER_HPP
