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

#ifndef PROVABS_PRIVACY_HPP
#define PROVABS_PRIVACY_HPP

#include "provabs/consistency.hpp"

namespace provabs {

// Minimality scope for CIM selection. Algorithmic follows the privacy
// computation performs: minimal within the connected consistent set.
// Strict quantifies the blocking queries over all consistent queries,
// including ones only witnessed by disconnected concretizations; it forces a
// full materialization of the concretization set.
enum class CimDef { Algorithmic, Strict };

struct PrivacyConfig {
  int k = 1;
  CimDef cim_def = CimDef::Algorithmic;
  bool trivial_exclusion = false;   // drop zero-variable CIM candidates
  bool row_by_row = true;
  bool connectivity_filter = true;
  bool use_cache = true;
  long long max_concretizations = 100000;
  long long max_alignments = 10000;
};

struct PrivacyOutcome {
  bool below_threshold = false;
  int privacy = 0;
  // Final CIM set, or on below_threshold the surviving set at the failing
  // check (diagnostic).
  std::vector<ConjunctiveQuery> cim;
  int failed_at_row = -1;  // number of rows processed when the check failed
  long long concretizations_expanded = 0;
};

// Row-by-row privacy: expands good concretization prefixes one row at a
// time, dropping disconnected concretizations and prefixes that admit no
// consistent query (consistency is row-monotone, so that pruning is exact);
// exits early when the prefix set empties, otherwise runs the threshold
// checks and CIM selection on the completed example. Single-row examples run
// the loop body once over the first row's own concretizations.
// Throws Error{CapExceeded} past cfg.max_concretizations and propagates
// Error{AlignmentExplosion, UnknownAnnotation}.
PrivacyOutcome compute_privacy(const AbstractedKExample& abstracted, const AbstractionTree& tree,
                               const KDatabase& db, const PrivacyConfig& cfg,
                               ConsistencyCache* cache);

// Equivalence-deduped input filtered to members with no strictly contained
// member.
std::vector<ConjunctiveQuery> get_minimal_queries(const std::vector<ConjunctiveQuery>& queries);

}  // namespace provabs

#endif  // PROVABS_PRIVACY_HPP
