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

#include "provabs/service.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

namespace provabs::service {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

const std::set<std::string> kKnownKeys = {
    "threshold",     "loiMax",          "distribution",   "maxAbstractions",
    "maxConcretizations", "maxAlignments", "disable",      "cimDef",
    "excludeTrivial", "seed",           "rowPrefix",      "countOnly"};

OptimizerConfig make_config(const Options& options, SearchMode mode) {
  OptimizerConfig cfg;
  cfg.mode = mode;
  cfg.k = options.threshold;
  cfg.loi_max = options.loi_max.value_or(0.0);
  cfg.loss = resolve_loss(options);
  cfg.caps = options.caps;
  cfg.toggles = options.toggles;
  cfg.cim_def = options.cim_def;
  cfg.trivial_exclusion = options.trivial_exclusion;
  cfg.seed = options.seed;
  return cfg;
}

ordered_json config_echo(const Options& options) {
  ordered_json echo;
  echo["threshold"] = options.threshold;
  if (options.loi_max.has_value()) echo["loiMax"] = *options.loi_max;
  echo["distribution"] = options.distribution;
  echo["maxAbstractions"] = options.caps.max_abstractions;
  echo["maxConcretizations"] = options.caps.max_concretizations;
  echo["maxAlignments"] = options.caps.max_alignments;
  ordered_json disabled = ordered_json::array();
  if (!options.toggles.sort_choices) disabled.push_back("sorting");
  if (!options.toggles.loi_first) disabled.push_back("loi-first");
  if (!options.toggles.row_by_row) disabled.push_back("row-by-row");
  if (!options.toggles.connectivity_filter) disabled.push_back("connectivity");
  if (!options.toggles.caching) disabled.push_back("caching");
  echo["disable"] = std::move(disabled);
  echo["cimDef"] = options.cim_def == CimDef::Strict ? "strict" : "algorithmic";
  echo["excludeTrivial"] = options.trivial_exclusion;
  echo["seed"] = options.seed;
  return echo;
}

ordered_json report_skeleton(const std::string& command, const Options& options,
                             const KDatabase* db, const AbstractionTree* tree,
                             const KExample* example) {
  ordered_json report;
  report["tool"] = "provabs";
  report["version"] = kVersion;
  report["command"] = command;
  ordered_json inputs;
  if (db != nullptr) inputs["database"] = digest(save_database(*db));
  if (tree != nullptr) inputs["tree"] = digest(save_tree(*tree));
  if (example != nullptr) inputs["example"] = digest(save_kexample(*example));
  report["inputs"] = std::move(inputs);
  report["config"] = config_echo(options);
  return report;
}

ordered_json abstraction_listing(const AbstractionChoice& choice, const KExample& example) {
  std::map<OccurrenceKey, std::string> labels;
  for (const Occurrence& occ : occurrences_of(example)) labels[occ.key] = occ.label;
  ordered_json out = ordered_json::array();
  for (const auto& [key, node] : choice.assignments) {
    const std::string& leaf = labels.at(key);
    if (leaf == node) continue;  // identity assignments are implicit
    ordered_json entry;
    entry["row"] = key.row;
    entry["ann"] = leaf;
    entry["occurrence"] = key.repeat;
    entry["node"] = node;
    out.push_back(std::move(entry));
  }
  return out;
}

ordered_json stats_json(const SearchStats& stats) {
  ordered_json out;
  out["choicesExamined"] = stats.choices_examined;
  out["privacyCalls"] = stats.privacy_calls;
  out["cacheHits"] = stats.cache_hits;
  out["capSkips"] = stats.cap_skips;
  out["elapsedSeconds"] = stats.elapsed_seconds;
  return out;
}

ordered_json queries_json(const std::vector<ConjunctiveQuery>& queries) {
  ordered_json out = ordered_json::array();
  for (const ConjunctiveQuery& q : queries) out.push_back(print_query(q));
  return out;
}

ordered_json example_json(const KExample& example) {
  return ordered_json::parse(save_kexample(example));
}

}  // namespace

Options parse_options(const std::string& options_json) {
  Options options;
  if (options_json.empty()) return options;
  json root;
  try {
    root = json::parse(options_json);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("options: ") + e.what());
  }
  if (!root.is_object()) {
    throw Error(ErrorKind::InvalidArgument, "options must be a JSON object");
  }
  for (const auto& [key, value] : root.items()) {
    (void)value;
    if (kKnownKeys.count(key) == 0) {
      throw Error(ErrorKind::InvalidArgument, "unknown option '" + key + "'");
    }
  }
  auto get_int = [&](const char* key, long long lo, long long hi) -> std::optional<long long> {
    if (!root.contains(key)) return std::nullopt;
    if (!root[key].is_number_integer()) {
      throw Error(ErrorKind::InvalidArgument, std::string("option '") + key + "' must be an integer");
    }
    long long v = root[key].get<long long>();
    if (v < lo || v > hi) {
      throw Error(ErrorKind::InvalidArgument, std::string("option '") + key + "' out of range");
    }
    return v;
  };
  if (auto v = get_int("threshold", 1, 1000000000)) options.threshold = static_cast<int>(*v);
  if (root.contains("loiMax")) {
    if (!root["loiMax"].is_number()) {
      throw Error(ErrorKind::InvalidArgument, "option 'loiMax' must be a number");
    }
    options.loi_max = root["loiMax"].get<double>();
    if (*options.loi_max < 0) {
      throw Error(ErrorKind::InvalidArgument, "option 'loiMax' must be >= 0");
    }
  }
  if (root.contains("distribution")) {
    if (!root["distribution"].is_string()) {
      throw Error(ErrorKind::InvalidArgument, "option 'distribution' must be a string");
    }
    options.distribution = root["distribution"].get<std::string>();
    if (options.distribution != "uniform" && options.distribution != "weighted" &&
        options.distribution.rfind("file:", 0) != 0) {
      throw Error(ErrorKind::InvalidArgument,
                  "distribution must be 'uniform', 'weighted' or 'file:<path>'");
    }
  }
  if (auto v = get_int("maxAbstractions", 1, 1000000000000ll)) options.caps.max_abstractions = *v;
  if (auto v = get_int("maxConcretizations", 1, 1000000000000ll)) {
    options.caps.max_concretizations = *v;
  }
  if (auto v = get_int("maxAlignments", 1, 1000000000000ll)) options.caps.max_alignments = *v;
  if (root.contains("disable")) {
    if (!root["disable"].is_array()) {
      throw Error(ErrorKind::InvalidArgument, "option 'disable' must be an array");
    }
    for (const json& item : root["disable"]) {
      std::string name = item.is_string() ? item.get<std::string>() : "";
      if (name == "sorting") {
        options.toggles.sort_choices = false;
      } else if (name == "loi-first") {
        options.toggles.loi_first = false;
      } else if (name == "row-by-row") {
        options.toggles.row_by_row = false;
      } else if (name == "connectivity") {
        options.toggles.connectivity_filter = false;
      } else if (name == "caching") {
        options.toggles.caching = false;
      } else {
        throw Error(ErrorKind::InvalidArgument, "unknown toggle '" + name + "'");
      }
    }
  }
  if (root.contains("cimDef")) {
    std::string def = root["cimDef"].is_string() ? root["cimDef"].get<std::string>() : "";
    if (def == "algorithmic") {
      options.cim_def = CimDef::Algorithmic;
    } else if (def == "strict") {
      options.cim_def = CimDef::Strict;
    } else {
      throw Error(ErrorKind::InvalidArgument, "cimDef must be 'algorithmic' or 'strict'");
    }
  }
  if (root.contains("excludeTrivial")) {
    if (!root["excludeTrivial"].is_boolean()) {
      throw Error(ErrorKind::InvalidArgument, "option 'excludeTrivial' must be a boolean");
    }
    options.trivial_exclusion = root["excludeTrivial"].get<bool>();
  }
  if (auto v = get_int("seed", 0, 4294967295ll)) options.seed = static_cast<unsigned>(*v);
  if (auto v = get_int("rowPrefix", 0, 1000000)) options.row_prefix = static_cast<int>(*v);
  if (root.contains("countOnly")) {
    if (!root["countOnly"].is_boolean()) {
      throw Error(ErrorKind::InvalidArgument, "option 'countOnly' must be a boolean");
    }
    options.count_only = root["countOnly"].get<bool>();
  }
  return options;
}

LossModel resolve_loss(const Options& options) {
  if (options.distribution == "uniform") return LossModel::uniform();
  if (options.distribution == "weighted") return LossModel::leaf_weighted();
  return load_distribution(options.distribution.substr(5));
}

std::string optimize_report(const KDatabase& db, const AbstractionTree& tree,
                            const KExample& example, const Options& options, SearchMode mode,
                            bool oracle, int* outcome_code) {
  validate_example_factors(example, db, nullptr);
  OptimizerConfig cfg = make_config(options, mode);
  if (mode == SearchMode::Dual && !options.loi_max.has_value()) {
    throw Error(ErrorKind::InvalidArgument, "dual mode requires a loss budget (loiMax)");
  }
  SearchOutcome outcome;
  std::string command = oracle ? "oracle" : (mode == SearchMode::Dual ? "dual" : "optimize");
  if (oracle) {
    outcome = brute_force_optimal(example, tree, db, cfg);
  } else if (mode == SearchMode::Dual) {
    outcome = find_max_privacy(example, tree, db, cfg);
  } else {
    outcome = find_optimal_abstraction(example, tree, db, cfg);
  }

  ordered_json report = report_skeleton(command, options, &db, &tree, &example);
  ordered_json result;
  if (outcome.incomplete) {
    result["status"] = "cap-exceeded";
  } else if (outcome.best.has_value()) {
    result["status"] = "ok";
  } else {
    result["status"] = "no-solution";
  }
  result["incomplete"] = outcome.incomplete;
  if (outcome.best.has_value()) {
    const SearchResult& best = *outcome.best;
    result["abstraction"] = abstraction_listing(best.choice, example);
    result["edgesUsed"] = best.choice.edges_used;
    result["loi"] = best.loi;
    result["privacy"] = best.privacy;
    result["cim"] = queries_json(best.cim);
    result["abstractedExample"] = example_json(best.abstracted.example);
  }
  result["stats"] = stats_json(outcome.stats);
  report["result"] = std::move(result);
  if (outcome_code != nullptr) {
    *outcome_code = outcome.incomplete ? 3 : (outcome.best.has_value() ? 0 : 1);
  }
  return report.dump(2) + "\n";
}

std::string privacy_report(const KDatabase& db, const AbstractionTree& tree,
                           const KExample& abstracted, const Options& options,
                           int* outcome_code) {
  validate_example_factors(abstracted, db, &tree);
  if (!is_compatible(tree, db)) {
    throw Error(ErrorKind::Validation, "tree is not compatible with the database");
  }
  OptimizerConfig cfg = make_config(options, SearchMode::Primal);
  PrivacyConfig pcfg = cfg.privacy_config(options.threshold);
  ConsistencyCache cache;
  AbstractedKExample wrapper{abstracted, std::nullopt};
  PrivacyOutcome outcome = compute_privacy(wrapper, tree, db, pcfg, &cache);

  ordered_json report = report_skeleton("privacy", options, &db, &tree, &abstracted);
  ordered_json result;
  result["status"] = outcome.below_threshold ? "below-threshold" : "ok";
  if (outcome.below_threshold) {
    result["failedAtRow"] = outcome.failed_at_row;
    result["survivingCim"] = queries_json(outcome.cim);
  } else {
    result["privacy"] = outcome.privacy;
    result["cim"] = queries_json(outcome.cim);
  }
  result["concretizationsExpanded"] = outcome.concretizations_expanded;
  report["result"] = std::move(result);
  if (outcome_code != nullptr) *outcome_code = outcome.below_threshold ? 1 : 0;
  return report.dump(2) + "\n";
}

std::string loi_report(const KDatabase& db, const AbstractionTree& tree,
                       const KExample& abstracted, const Options& options) {
  validate_example_factors(abstracted, db, &tree);
  AbstractedKExample wrapper{abstracted, std::nullopt};
  LossModel loss = resolve_loss(options);
  ordered_json report = report_skeleton("loi", options, &db, &tree, &abstracted);
  ordered_json result;
  result["loi"] = loss_of_information(wrapper, tree, loss);
  result["concretizations"] = concretization_count(wrapper, tree);
  report["result"] = std::move(result);
  return report.dump(2) + "\n";
}

std::string concretize_report(const KDatabase& db, const AbstractionTree& tree,
                              const KExample& abstracted, const Options& options) {
  validate_example_factors(abstracted, db, &tree);
  AbstractedKExample wrapper{abstracted, std::nullopt};
  ordered_json report = report_skeleton("concretize", options, &db, &tree, &abstracted);
  ordered_json result;
  result["count"] = concretization_count(wrapper, tree);
  if (!options.count_only) {
    std::vector<Concretization> all = enumerate_concretizations(
        wrapper, tree, db, options.row_prefix, options.caps.max_concretizations);
    ordered_json list = ordered_json::array();
    for (const Concretization& c : all) list.push_back(example_json(c.example));
    result["concretizations"] = std::move(list);
  }
  report["result"] = std::move(result);
  return report.dump(2) + "\n";
}

std::string consistent_report(const KDatabase& db, const KExample& concrete,
                              const Options& options) {
  validate_example_factors(concrete, db, nullptr);
  Concretization wrapper;
  wrapper.example = concrete;
  ConsistencyCache cache;
  bool connected = concretization_is_connected(wrapper, db, &cache);
  ordered_json report = report_skeleton("consistent", options, &db, nullptr, &concrete);
  ordered_json result;
  result["connected"] = connected;
  ordered_json list = ordered_json::array();
  if (connected) {
    ConsistencyConfig ccfg{options.caps.max_alignments};
    for (const ConjunctiveQuery& q : consistent_queries(wrapper, db, &cache, ccfg)) {
      ordered_json entry;
      entry["query"] = print_query(q);
      entry["connected"] = is_connected_query(q);
      list.push_back(std::move(entry));
    }
  }
  result["queries"] = std::move(list);
  report["result"] = std::move(result);
  return report.dump(2) + "\n";
}

std::string generate_bundle(const std::string& spec_json) {
  json root;
  try {
    root = spec_json.empty() ? json::object() : json::parse(spec_json);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("workload spec: ") + e.what());
  }
  if (!root.is_object()) {
    throw Error(ErrorKind::InvalidArgument, "workload spec must be a JSON object");
  }
  const std::set<std::string> known = {"relations", "tuplesPerRelation", "domainSize",
                                       "leaves",    "height",            "branching",
                                       "atoms",     "joins",             "rows",
                                       "seed"};
  for (const auto& [key, value] : root.items()) {
    (void)value;
    if (known.count(key) == 0) {
      throw Error(ErrorKind::InvalidArgument, "unknown workload field '" + key + "'");
    }
  }
  auto get = [&](const char* key, int fallback) {
    if (!root.contains(key)) return fallback;
    if (!root[key].is_number_integer()) {
      throw Error(ErrorKind::InvalidArgument, std::string("workload field '") + key +
                                                 "' must be an integer");
    }
    return root[key].get<int>();
  };
  WorkloadSpec spec;
  spec.relation_count = get("relations", spec.relation_count);
  spec.tuples_per_relation = get("tuplesPerRelation", spec.tuples_per_relation);
  spec.domain_size = get("domainSize", spec.domain_size);
  spec.tree_leaf_count = get("leaves", spec.tree_leaf_count);
  spec.tree_height = get("height", spec.tree_height);
  spec.branching = get("branching", spec.branching);
  spec.query_atom_count = get("atoms", spec.query_atom_count);
  spec.join_count = get("joins", spec.query_atom_count - 1);
  spec.example_rows = get("rows", spec.example_rows);
  spec.seed = static_cast<unsigned>(get("seed", 0));

  Workload workload = generate_workload(spec);
  ordered_json bundle;
  bundle["database"] = save_database(workload.db);
  bundle["tree"] = save_tree(workload.tree);
  bundle["example"] = save_kexample(workload.example);
  bundle["query"] = print_query(workload.query);
  return bundle.dump(2) + "\n";
}

std::string bench_csv(const KDatabase& db, const AbstractionTree& tree, const KExample& example,
                      const Options& options) {
  validate_example_factors(example, db, nullptr);
  OptimizerConfig cfg = make_config(options, SearchMode::Primal);

  struct Variant {
    const char* name;
    SearchToggles toggles;
  };
  SearchToggles all_on;
  std::vector<Variant> variants{{"all-on", all_on}};
  auto add = [&](const char* name, auto mutate) {
    SearchToggles t = all_on;
    mutate(t);
    variants.push_back({name, t});
  };
  add("no-sorting", [](SearchToggles& t) { t.sort_choices = false; });
  add("no-loi-first", [](SearchToggles& t) { t.loi_first = false; });
  add("no-row-by-row", [](SearchToggles& t) { t.row_by_row = false; });
  add("no-connectivity", [](SearchToggles& t) { t.connectivity_filter = false; });
  add("no-caching", [](SearchToggles& t) { t.caching = false; });

  std::ostringstream out;
  out << "config,status,loi,privacy,choicesExamined,privacyCalls,cacheHits,capSkips,"
         "elapsedSeconds,matchesBaseline\n";
  std::optional<SearchResult> baseline;
  bool baseline_incomplete = false;
  for (const Variant& variant : variants) {
    SearchOutcome outcome = ablation_run(example, tree, db, cfg, variant.toggles);
    bool matches;
    if (std::string(variant.name) == "all-on") {
      baseline = outcome.best;
      baseline_incomplete = outcome.incomplete;
      matches = true;
    } else {
      matches = outcome.incomplete == baseline_incomplete &&
                outcome.best.has_value() == baseline.has_value() &&
                (!outcome.best.has_value() ||
                 (outcome.best->loi == baseline->loi && outcome.best->privacy == baseline->privacy));
    }
    out << variant.name << ','
        << (outcome.incomplete ? "cap-exceeded" : outcome.best ? "ok" : "no-solution") << ',';
    if (outcome.best.has_value()) {
      out << outcome.best->loi << ',' << outcome.best->privacy << ',';
    } else {
      out << ",,";
    }
    out << outcome.stats.choices_examined << ',' << outcome.stats.privacy_calls << ','
        << outcome.stats.cache_hits << ',' << outcome.stats.cap_skips << ','
        << outcome.stats.elapsed_seconds << ',' << (matches ? "yes" : "no") << '\n';
  }
  return out.str();
}

}  // namespace provabs::service
