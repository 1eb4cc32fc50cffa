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

#include "provabs/optimizer.hpp"

#include <chrono>
#include <limits>

namespace provabs {

namespace {

using Clock = std::chrono::steady_clock;

void check_inputs(const KExample& example, const AbstractionTree& tree, const KDatabase& db) {
  example.validate();
  if (!is_compatible(tree, db)) {
    throw Error(ErrorKind::Validation,
                "abstraction tree is not compatible with the database (inner label collides "
                "with an annotation)");
  }
  for (const std::string& label : var_set(example)) db.require(label);
}

struct PrivacyResult {
  bool computed = false;  // false when a per-choice cap was hit
  int privacy = 0;
  std::vector<ConjunctiveQuery> cim;
};

PrivacyResult run_privacy(const AbstractionChoice& choice, const KExample& example,
                          const AbstractionTree& tree, const KDatabase& db,
                          const PrivacyConfig& pcfg, ConsistencyCache* cache,
                          SearchStats& stats) {
  PrivacyResult result;
  AbstractedKExample abstracted = apply_abstraction(choice, example, tree);
  ++stats.privacy_calls;
  try {
    PrivacyOutcome outcome = compute_privacy(abstracted, tree, db, pcfg, cache);
    result.computed = true;
    if (!outcome.below_threshold) {
      result.privacy = outcome.privacy;
      result.cim = std::move(outcome.cim);
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::CapExceeded && e.kind() != ErrorKind::AlignmentExplosion) throw;
    ++stats.cap_skips;
  }
  return result;
}

SearchOutcome search(const KExample& example, const AbstractionTree& tree, const KDatabase& db,
                     const OptimizerConfig& cfg, bool oracle) {
  check_inputs(example, tree, db);
  auto started = Clock::now();
  SearchOutcome outcome;

  ConsistencyCache cache;
  ConsistencyCache* memo = (!oracle && cfg.toggles.caching) ? &cache : nullptr;

  PrivacyConfig pcfg = cfg.privacy_config(cfg.mode == SearchMode::Primal ? cfg.k : 1);
  if (oracle) {
    pcfg.k = 1;
    pcfg.row_by_row = false;
    pcfg.connectivity_filter = false;
    pcfg.use_cache = false;
  }

  // The oracle scans the same deterministic order so equal-loss ties resolve
  // identically in both computations.
  ChoiceEnumerator choices(example, tree, cfg.loss, oracle || cfg.toggles.sort_choices);

  double best_loss = std::numeric_limits<double>::infinity();
  int best_privacy = -1;

  while (auto item = choices.next()) {
    if (outcome.stats.choices_examined >= cfg.caps.max_abstractions) {
      if (oracle) {
        throw Error(ErrorKind::CapExceeded,
                    "oracle choice space exceeds cap " + std::to_string(cfg.caps.max_abstractions),
                    choices.total());
      }
      outcome.incomplete = true;
      break;
    }
    ++outcome.stats.choices_examined;
    double loss = item->loss;

    if (cfg.mode == SearchMode::Primal) {
      bool worth_checking = loss < best_loss;
      if (!oracle && cfg.toggles.loi_first && !worth_checking) continue;
      PrivacyResult p =
          run_privacy(item->choice, example, tree, db, pcfg, memo, outcome.stats);
      if (!p.computed) {
        if (worth_checking) outcome.incomplete = true;
        continue;
      }
      if (p.privacy >= cfg.k && worth_checking) {
        SearchResult best;
        best.choice = item->choice;
        best.abstracted = apply_abstraction(item->choice, example, tree);
        best.loi = loss;
        best.privacy = p.privacy;
        best.cim = std::move(p.cim);
        outcome.best = std::move(best);
        best_loss = loss;
        if (best_loss == 0.0 && !oracle) break;  // nothing can strictly improve
      }
    } else {
      if (loss > cfg.loi_max) continue;
      PrivacyResult p =
          run_privacy(item->choice, example, tree, db, pcfg, memo, outcome.stats);
      if (!p.computed) {
        outcome.incomplete = true;
        continue;
      }
      bool better = p.privacy > best_privacy ||
                    (outcome.best.has_value() && p.privacy == best_privacy && loss < best_loss);
      if (better) {
        SearchResult best;
        best.choice = item->choice;
        best.abstracted = apply_abstraction(item->choice, example, tree);
        best.loi = loss;
        best.privacy = p.privacy;
        best.cim = std::move(p.cim);
        outcome.best = std::move(best);
        best_privacy = p.privacy;
        best_loss = loss;
      }
    }
  }

  outcome.stats.cache_hits = cache.hits();
  outcome.stats.elapsed_seconds =
      std::chrono::duration<double>(Clock::now() - started).count();
  return outcome;
}

}  // namespace

PrivacyConfig OptimizerConfig::privacy_config(int threshold) const {
  PrivacyConfig pcfg;
  pcfg.k = threshold;
  pcfg.cim_def = cim_def;
  pcfg.trivial_exclusion = trivial_exclusion;
  pcfg.row_by_row = toggles.row_by_row;
  pcfg.connectivity_filter = toggles.connectivity_filter;
  pcfg.use_cache = toggles.caching;
  pcfg.max_concretizations = caps.max_concretizations;
  pcfg.max_alignments = caps.max_alignments;
  return pcfg;
}

SearchOutcome find_optimal_abstraction(const KExample& example, const AbstractionTree& tree,
                                       const KDatabase& db, const OptimizerConfig& cfg) {
  if (cfg.mode != SearchMode::Primal) {
    throw Error(ErrorKind::InvalidArgument, "find_optimal_abstraction expects primal mode");
  }
  if (cfg.k < 1) throw Error(ErrorKind::InvalidArgument, "threshold must be at least 1");
  return search(example, tree, db, cfg, /*oracle=*/false);
}

SearchOutcome find_max_privacy(const KExample& example, const AbstractionTree& tree,
                               const KDatabase& db, const OptimizerConfig& cfg) {
  if (cfg.mode != SearchMode::Dual) {
    throw Error(ErrorKind::InvalidArgument, "find_max_privacy expects dual mode");
  }
  if (cfg.loi_max < 0) throw Error(ErrorKind::InvalidArgument, "loss budget must be >= 0");
  return search(example, tree, db, cfg, /*oracle=*/false);
}

SearchOutcome brute_force_optimal(const KExample& example, const AbstractionTree& tree,
                                  const KDatabase& db, const OptimizerConfig& cfg) {
  if (cfg.mode == SearchMode::Primal && cfg.k < 1) {
    throw Error(ErrorKind::InvalidArgument, "threshold must be at least 1");
  }
  if (cfg.mode == SearchMode::Dual && cfg.loi_max < 0) {
    throw Error(ErrorKind::InvalidArgument, "loss budget must be >= 0");
  }
  return search(example, tree, db, cfg, /*oracle=*/true);
}

SearchOutcome ablation_run(const KExample& example, const AbstractionTree& tree,
                           const KDatabase& db, OptimizerConfig cfg,
                           const SearchToggles& toggles) {
  cfg.toggles = toggles;
  return search(example, tree, db, cfg, /*oracle=*/false);
}

}  // namespace provabs
