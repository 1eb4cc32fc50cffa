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

// Acceptance suite. Runs every acceptance check at its stated tolerance and
// prints one PASS/FAIL line per criterion; the exit code is the number of
// failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

using namespace provabs;
using namespace provabs::testing;

namespace {

using Clock = std::chrono::steady_clock;

int g_failures = 0;

void run_criterion(int number, const std::string& title,
                   const std::function<void(std::ostringstream&)>& body) {
  std::ostringstream detail;
  auto started = Clock::now();
  bool ok = true;
  std::string error;
  try {
    body(detail);
  } catch (const std::exception& e) {
    ok = false;
    error = e.what();
  }
  double elapsed = std::chrono::duration<double>(Clock::now() - started).count();
  if (ok) {
    std::printf("PASS  criterion %2d: %s (%.2fs)%s%s\n", number, title.c_str(), elapsed,
                detail.str().empty() ? "" : " -- ", detail.str().c_str());
  } else {
    ++g_failures;
    std::printf("FAIL  criterion %2d: %s (%.2fs) -- %s\n", number, title.c_str(), elapsed,
                error.c_str());
  }
  std::fflush(stdout);
}

void require(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

PrivacyOutcome privacy_of(const KExample& abstracted, int k) {
  PrivacyConfig cfg;
  cfg.k = k;
  ConsistencyCache cache;
  return compute_privacy(AbstractedKExample{abstracted, std::nullopt}, running_tree(),
                         running_db(), cfg, &cache);
}

OptimizerConfig primal_config(int k) {
  OptimizerConfig cfg;
  cfg.mode = SearchMode::Primal;
  cfg.k = k;
  return cfg;
}

struct RandomInstance {
  Workload workload;
  int k = 1;
};

// Instance corpus within the stated bounds (<= 3 relations, <= 8 tuples per
// relation, trees <= 20 leaves of height <= 3, 2-row examples). Instances
// whose option space would make the brute-force scan needlessly slow are
// resampled deterministically.
std::vector<RandomInstance> corpus(int wanted, unsigned seed_base, int rows = 2) {
  std::vector<RandomInstance> out;
  unsigned seed = seed_base;
  int attempts = 0;
  while (static_cast<int>(out.size()) < wanted && attempts < wanted * 6) {
    ++attempts;
    ++seed;
    WorkloadSpec spec;
    spec.relation_count = 2 + static_cast<int>(seed % 2);
    spec.tuples_per_relation = 4 + static_cast<int>((seed / 2) % 5);
    spec.domain_size = 3 + static_cast<int>((seed / 3) % 3);
    spec.tree_leaf_count = 6 + static_cast<int>((seed / 5) % 9);
    spec.tree_height = 2 + static_cast<int>(seed % 2);
    spec.branching = 2 + static_cast<int>((seed / 7) % 2);
    spec.query_atom_count = 2;
    spec.join_count = 1;
    spec.example_rows = rows;
    spec.seed = seed;
    Workload w;
    try {
      w = generate_workload(spec);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::InfeasibleSpec) continue;
      throw;
    }
    // Estimated brute-force effort: product over abstractable occurrences of
    // the summed leaf counts along the ancestor chain.
    double estimate = 1;
    for (const Occurrence& occ : occurrences_of(w.example)) {
      if (!w.tree.has_node(occ.label) || !w.tree.is_leaf(occ.label)) continue;
      double options = 0;
      for (const std::string& node : w.tree.ancestors_or_self(occ.label)) {
        options += static_cast<double>(w.tree.leaf_count(node));
      }
      estimate *= options;
    }
    if (estimate > 400000.0) continue;
    RandomInstance instance;
    instance.workload = std::move(w);
    instance.k = 1 + static_cast<int>(seed % 3);
    out.push_back(std::move(instance));
  }
  return out;
}

}  // namespace

int main() {
  run_criterion(1, "privacy of the abstracted running example is 2", [](std::ostringstream& d) {
    auto started = Clock::now();
    PrivacyOutcome outcome = privacy_of(ex_abs1(), 2);
    double elapsed = std::chrono::duration<double>(Clock::now() - started).count();
    require(!outcome.below_threshold, "expected the threshold to be met");
    require(outcome.privacy == 2, "expected privacy 2, got " + std::to_string(outcome.privacy));
    require(same_query_set(outcome.cim, {q_real(), q_false1()}),
            "CIM set differs from {Q_real, Q_false1}");
    require(elapsed < 1.0, "exceeded the 1s budget");
    d << "privacy=2, cim={Q_real,Q_false1}";
  });

  run_criterion(2, "rejection of the weak abstraction at k=2", [](std::ostringstream& d) {
    auto started = Clock::now();
    PrivacyOutcome outcome = privacy_of(ex_abs3(), 2);
    double elapsed = std::chrono::duration<double>(Clock::now() - started).count();
    require(outcome.below_threshold, "expected below-threshold");
    require(outcome.cim.size() == 1, "expected a single surviving CIM query");
    require(equivalent(outcome.cim[0], q_real()), "surviving CIM is not Q_real");
    require(elapsed < 1.0, "exceeded the 1s budget");
    d << "below threshold, surviving cim=Q_real";
  });

  run_criterion(3, "concretization counts 15 / 20 / 4 / 1", [](std::ostringstream& d) {
    AbstractionTree tree = running_tree();
    long long c1 = concretization_count(AbstractedKExample{ex_abs1(), std::nullopt}, tree);
    long long c2 = concretization_count(AbstractedKExample{ex_abs2(), std::nullopt}, tree);
    long long c3 = concretization_count(AbstractedKExample{ex_abs3(), std::nullopt}, tree);
    long long c0 = concretization_count(AbstractedKExample{ex_real(), std::nullopt}, tree);
    require(c1 == 15, "abs1 count " + std::to_string(c1));
    require(c2 == 20, "abs2 count " + std::to_string(c2));
    require(c3 == 4, "abs3 count " + std::to_string(c3));
    require(c0 == 1, "identity count " + std::to_string(c0));
    d << "15/20/4/1";
  });

  run_criterion(4, "loss-of-information values", [](std::ostringstream& d) {
    AbstractionTree tree = running_tree();
    LossModel uniform = LossModel::uniform();
    double l1 = loss_of_information(AbstractedKExample{ex_abs1(), std::nullopt}, tree, uniform);
    double l2 = loss_of_information(AbstractedKExample{ex_abs2(), std::nullopt}, tree, uniform);
    require(std::abs(l1 - std::log(15.0)) < 1e-9, "LOI(abs1) != ln 15");
    require(std::abs(l2 - std::log(20.0)) < 1e-9, "LOI(abs2) != ln 20");
    LossModel explicit_model = LossModel::explicit_distribution({0.1, 0.2, 0.3, 0.4});
    double le = loss_of_information(AbstractedKExample{ex_abs3(), std::nullopt}, tree,
                                    explicit_model);
    require(std::abs(le - 1.27985) < 1e-3, "explicit entropy " + std::to_string(le));
    d << "ln15, ln20, 1.27985";
  });

  run_criterion(5, "connectivity filter on the abs3 concretization set",
                [](std::ostringstream& d) {
    AbstractionTree tree = running_tree();
    KDatabase db = running_db();
    auto all = enumerate_concretizations(AbstractedKExample{ex_abs3(), std::nullopt}, tree, db,
                                         std::nullopt, 100);
    require(all.size() == 4, "expected 4 concretizations");
    std::vector<std::string> third{"h6", "i1", "i4", "i6"};
    std::vector<bool> expected_connected{false, true, true, false};
    ConsistencyCache cache;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& factors = all[i].example.rows[0].provenance.factors;
      require(factors.count(third[i]) == 1, "unexpected enumeration order");
      bool connected = concretization_is_connected(all[i], db, &cache);
      require(connected == expected_connected[i],
              "connectivity of c" + std::to_string(i + 1) + " wrong");
    }
    d << "exactly c1 and c4 disconnected";
  });

  run_criterion(6, "containment between Q_general and Q_real", [](std::ostringstream& d) {
    require(contains(q_general(), q_real()), "Q_real should be contained in Q_general");
    require(!contains(q_real(), q_general()), "Q_general must not be contained in Q_real");
    d << "Q_real subset of Q_general only";
  });

  run_criterion(7, "end-to-end optimum on the running example", [](std::ostringstream& d) {
    auto started = Clock::now();
    SearchOutcome outcome =
        find_optimal_abstraction(ex_real(), running_tree(), running_db(), primal_config(2));
    double elapsed = std::chrono::duration<double>(Clock::now() - started).count();
    require(outcome.best.has_value(), "no abstraction found");
    require(std::abs(outcome.best->loi - std::log(15.0)) < 1e-9, "optimal loi is not ln 15");
    require(same_query_set(outcome.best->cim, {q_real(), q_false1()}),
            "CIM set differs from {Q_real, Q_false1}");
    require(elapsed < 5.0, "exceeded the 5s budget");
    d << "loi=ln15, cim={Q_real,Q_false1}";
  });

  run_criterion(8, "oracle equivalence and dual coherence on 200 seeded instances",
                [](std::ostringstream& d) {
    auto started = Clock::now();
    std::vector<RandomInstance> instances = corpus(200, 1000);
    require(static_cast<int>(instances.size()) >= 200, "could not build 200 instances");
    int agreements = 0;
    for (const RandomInstance& inst : instances) {
      OptimizerConfig cfg = primal_config(inst.k);
      cfg.caps.max_concretizations = 3000000;
      cfg.caps.max_abstractions = 3000000;
      SearchOutcome fast =
          find_optimal_abstraction(inst.workload.example, inst.workload.tree, inst.workload.db, cfg);
      SearchOutcome oracle =
          brute_force_optimal(inst.workload.example, inst.workload.tree, inst.workload.db, cfg);
      require(!fast.incomplete && !oracle.incomplete, "caps hit inside the corpus");
      require(fast.best.has_value() == oracle.best.has_value(),
              "existence disagreement at k=" + std::to_string(inst.k));
      if (fast.best.has_value()) {
        require(fast.best->loi == oracle.best->loi, "optimal loss differs");
        require(same_query_set(fast.best->cim, oracle.best->cim), "CIM sets differ");
        OptimizerConfig dual_cfg = cfg;
        dual_cfg.mode = SearchMode::Dual;
        dual_cfg.loi_max = fast.best->loi;
        SearchOutcome dual_run = find_max_privacy(inst.workload.example, inst.workload.tree,
                                                  inst.workload.db, dual_cfg);
        require(dual_run.best.has_value(), "dual found nothing within the primal optimum budget");
        require(dual_run.best->privacy >= inst.k, "dual/primal coherence violated");
      }
      ++agreements;
    }
    double elapsed = std::chrono::duration<double>(Clock::now() - started).count();
    require(elapsed < 600.0, "exceeded the 10min budget");
    d << agreements << " instances agree";
  });

  run_criterion(9, "concretization-set size bounds are tight", [](std::ostringstream& d) {
    std::mt19937 rng(4242);
    int checked = 0;
    for (const RandomInstance& inst : corpus(40, 9000)) {
      const AbstractionTree& tree = inst.workload.tree;
      const KExample& example = inst.workload.example;
      long long leaves = tree.leaf_count(tree.root());
      AbstractionChoice random_choice;
      AbstractionChoice all_root;
      int n_abstracted = 0;
      int n_occurrences = 0;
      for (const Occurrence& occ : occurrences_of(example)) {
        if (!tree.has_node(occ.label) || !tree.is_leaf(occ.label)) continue;
        ++n_occurrences;
        all_root.assignments[occ.key] = tree.root();
        auto chain = tree.ancestors_or_self(occ.label);
        std::size_t step = rng() % chain.size();
        random_choice.assignments[occ.key] = chain[step];
        if (step != 0) ++n_abstracted;
      }
      long long count =
          concretization_count(apply_abstraction(random_choice, example, tree), tree);
      long long upper = 1;
      for (int i = 0; i < n_abstracted; ++i) upper *= leaves;
      require(count >= 1 && count <= upper, "bounds violated");
      require(concretization_count(apply_abstraction(AbstractionChoice{}, example, tree), tree) ==
                  1,
              "identity lower bound not attained");
      long long root_count =
          concretization_count(apply_abstraction(all_root, example, tree), tree);
      long long root_bound = 1;
      for (int i = 0; i < n_occurrences; ++i) root_bound *= leaves;
      require(root_count == root_bound, "all-root upper bound not attained");
      ++checked;
    }
    require(checked >= 30, "too few instances checked");
    d << checked << " instances";
  });

  run_criterion(10, "ablations keep the optimum; sorting+loi-first saves privacy calls",
                [](std::ostringstream& d) {
    std::vector<RandomInstance> instances = corpus(20, 5000);
    require(static_cast<int>(instances.size()) == 20, "could not build 20 instances");
    // The golden instance first.
    RandomInstance golden;
    golden.workload.db = running_db();
    golden.workload.tree = running_tree();
    golden.workload.example = ex_real();
    golden.k = 2;
    instances.insert(instances.begin(), std::move(golden));

    SearchToggles variants[5];
    variants[0].sort_choices = false;
    variants[1].loi_first = false;
    variants[2].row_by_row = false;
    variants[3].connectivity_filter = false;
    variants[4].caching = false;
    SearchToggles both_off;
    both_off.sort_choices = false;
    both_off.loi_first = false;

    for (const RandomInstance& inst : instances) {
      OptimizerConfig cfg = primal_config(inst.k);
      cfg.caps.max_concretizations = 3000000;
      SearchOutcome base = ablation_run(inst.workload.example, inst.workload.tree,
                                        inst.workload.db, cfg, SearchToggles{});
      for (const SearchToggles& toggles : variants) {
        SearchOutcome variant = ablation_run(inst.workload.example, inst.workload.tree,
                                             inst.workload.db, cfg, toggles);
        require(variant.best.has_value() == base.best.has_value(), "existence differs");
        if (base.best.has_value()) {
          require(variant.best->loi == base.best->loi, "optimal loss changed by a toggle");
        }
      }
      SearchOutcome slow = ablation_run(inst.workload.example, inst.workload.tree,
                                        inst.workload.db, cfg, both_off);
      require(base.stats.privacy_calls <= slow.stats.privacy_calls,
              "sorted + loi-first made more privacy calls than the disabled variant");
    }
    d << "21 instances, 5 toggles each";
  });

  run_criterion(11, "desk-scale smoke completes or reports caps honestly",
                [](std::ostringstream& d) {
    auto started = Clock::now();
    WorkloadSpec spec;
    spec.relation_count = 2;
    spec.tuples_per_relation = 500;  // 1000 tuples in total
    spec.domain_size = 40;
    spec.tree_leaf_count = 1000;
    spec.tree_height = 5;
    spec.branching = 4;
    spec.query_atom_count = 2;
    spec.join_count = 1;
    spec.example_rows = 2;
    spec.seed = 7;
    Workload w = generate_workload(spec);
    OptimizerConfig cfg = primal_config(5);
    SearchOutcome outcome = find_optimal_abstraction(w.example, w.tree, w.db, cfg);
    double elapsed = std::chrono::duration<double>(Clock::now() - started).count();
    require(elapsed < 60.0, "exceeded the 60s budget");
    if (outcome.incomplete) {
      d << "cap-exceeded reported honestly in " << elapsed << "s";
    } else if (outcome.best.has_value()) {
      d << "optimum loi=" << outcome.best->loi << " privacy=" << outcome.best->privacy << " in "
        << elapsed << "s";
    } else {
      d << "no abstraction meets k=5, certified in " << elapsed << "s";
    }
  });

  if (g_failures == 0) {
    std::printf("acceptance: all criteria passed\n");
  } else {
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  }
  return g_failures;
}
