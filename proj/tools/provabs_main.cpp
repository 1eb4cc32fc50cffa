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

// Command-line front end. All computation goes through the provabs C API;
// this file only parses arguments, builds option documents and renders
// reports.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "provabs.h"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitNoSolution = 1;
constexpr int kExitInputError = 2;
constexpr int kExitCapExceeded = 3;

int exit_code(provabs_status status) {
  switch (status) {
    case PROVABS_OK: return kExitOk;
    case PROVABS_NO_SOLUTION: return kExitNoSolution;
    case PROVABS_CAP_EXCEEDED: return kExitCapExceeded;
    case PROVABS_INPUT_ERROR:
    case PROVABS_INTERNAL_ERROR:
    default:
      return kExitInputError;
  }
}

struct CommonArgs {
  std::string db_path;
  std::string tree_path;
  std::string example_path;
  std::optional<int> threshold;
  std::optional<double> loi_max;
  std::string distribution = "uniform";
  std::optional<long long> max_abstractions;
  std::optional<long long> max_concretizations;
  std::optional<long long> max_alignments;
  std::vector<std::string> disable;
  std::string cim_def = "algorithmic";
  bool exclude_trivial = false;
  std::optional<unsigned> seed;
  std::string out_path;
  std::string format = "text";
  std::optional<int> row_prefix;
  bool count_only = false;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool needs_tree) {
  cmd->add_option("--db", args.db_path, "database file")->required();
  if (needs_tree) cmd->add_option("--tree", args.tree_path, "abstraction tree file")->required();
  cmd->add_option("--example", args.example_path, "k-example file")->required();
  cmd->add_option("--threshold", args.threshold, "privacy threshold k");
  cmd->add_option("--loi-max", args.loi_max, "loss-of-information budget (dual mode)");
  cmd->add_option("--distribution", args.distribution,
                  "loss model: uniform | weighted | file:<path>");
  cmd->add_option("--max-abstractions", args.max_abstractions, "abstraction scan cap");
  cmd->add_option("--max-concretizations", args.max_concretizations, "concretization cap");
  cmd->add_option("--max-alignments", args.max_alignments, "alignment cap");
  cmd->add_option("--disable", args.disable,
                  "disable a component: sorting | loi-first | row-by-row | connectivity | caching")
      ->allow_extra_args(false);
  cmd->add_option("--cim-def", args.cim_def, "CIM minimality scope: algorithmic | strict");
  cmd->add_flag("--exclude-trivial", args.exclude_trivial, "reject zero-variable CIM candidates");
  cmd->add_option("--seed", args.seed, "seed echoed into the report");
  cmd->add_option("--out", args.out_path, "write the report to a file instead of stdout");
  cmd->add_option("--format", args.format, "report format: json | text")
      ->check(CLI::IsMember({"json", "text"}));
}

std::string build_options(const CommonArgs& args) {
  ordered_json options = ordered_json::object();
  if (args.threshold) options["threshold"] = *args.threshold;
  if (args.loi_max) options["loiMax"] = *args.loi_max;
  if (args.distribution != "uniform") options["distribution"] = args.distribution;
  if (args.max_abstractions) options["maxAbstractions"] = *args.max_abstractions;
  if (args.max_concretizations) options["maxConcretizations"] = *args.max_concretizations;
  if (args.max_alignments) options["maxAlignments"] = *args.max_alignments;
  if (!args.disable.empty()) options["disable"] = args.disable;
  if (args.cim_def != "algorithmic") options["cimDef"] = args.cim_def;
  if (args.exclude_trivial) options["excludeTrivial"] = true;
  if (args.seed) options["seed"] = *args.seed;
  if (args.row_prefix) options["rowPrefix"] = *args.row_prefix;
  if (args.count_only) options["countOnly"] = true;
  return options.dump();
}

struct ApiString {
  char* value = nullptr;
  ~ApiString() { provabs_string_free(value); }
};

struct Handles {
  provabs_database* db = nullptr;
  provabs_tree* tree = nullptr;
  provabs_example* example = nullptr;
  ~Handles() {
    provabs_database_free(db);
    provabs_tree_free(tree);
    provabs_example_free(example);
  }
};

int load_handles(const CommonArgs& args, bool needs_tree, Handles& handles) {
  if (provabs_database_from_file(args.db_path.c_str(), &handles.db) != PROVABS_OK) {
    std::cerr << "provabs: " << provabs_last_error() << "\n";
    return kExitInputError;
  }
  if (needs_tree &&
      provabs_tree_from_file(args.tree_path.c_str(), &handles.tree) != PROVABS_OK) {
    std::cerr << "provabs: " << provabs_last_error() << "\n";
    return kExitInputError;
  }
  if (provabs_example_from_file(args.example_path.c_str(), &handles.example) != PROVABS_OK) {
    std::cerr << "provabs: " << provabs_last_error() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

std::string render_text(const std::string& report_json) {
  ordered_json report = ordered_json::parse(report_json);
  std::ostringstream out;
  const ordered_json& result = report["result"];
  out << report["command"].get<std::string>() << " report";
  if (result.contains("status")) out << " (" << result["status"].get<std::string>() << ")";
  out << "\n";
  if (result.contains("loi")) out << "  loi: " << result["loi"].get<double>() << "\n";
  if (result.contains("privacy")) out << "  privacy: " << result["privacy"].get<long long>() << "\n";
  if (result.contains("edgesUsed")) {
    out << "  edges used: " << result["edgesUsed"].get<long long>() << "\n";
  }
  if (result.contains("count")) out << "  count: " << result["count"].get<long long>() << "\n";
  if (result.contains("concretizations") && result["concretizations"].is_number()) {
    out << "  concretizations: " << result["concretizations"].get<long long>() << "\n";
  }
  if (result.contains("connected")) {
    out << "  connected: " << (result["connected"].get<bool>() ? "yes" : "no") << "\n";
  }
  if (result.contains("failedAtRow")) {
    out << "  failed after row: " << result["failedAtRow"].get<long long>() << "\n";
  }
  if (result.contains("abstraction")) {
    out << "  abstraction:\n";
    if (result["abstraction"].empty()) out << "    (identity)\n";
    for (const ordered_json& entry : result["abstraction"]) {
      out << "    row " << entry["row"].get<int>() << ": " << entry["ann"].get<std::string>()
          << " -> " << entry["node"].get<std::string>();
      if (entry["occurrence"].get<int>() != 0) {
        out << " (occurrence " << entry["occurrence"].get<int>() << ")";
      }
      out << "\n";
    }
  }
  for (const char* key : {"cim", "survivingCim"}) {
    if (result.contains(key)) {
      out << "  " << (std::string(key) == "cim" ? "cim queries" : "surviving cim queries")
          << ":\n";
      for (const ordered_json& q : result[key]) out << "    " << q.get<std::string>() << "\n";
    }
  }
  if (result.contains("queries")) {
    out << "  consistent queries:\n";
    for (const ordered_json& q : result["queries"]) {
      out << "    " << q["query"].get<std::string>()
          << (q["connected"].get<bool>() ? "  [connected]" : "") << "\n";
    }
  }
  if (result.contains("concretizations") && result["concretizations"].is_array()) {
    out << "  concretizations:\n";
    for (const ordered_json& c : result["concretizations"]) {
      out << "    ";
      bool first_row = true;
      for (const ordered_json& row : c["rows"]) {
        if (!first_row) out << " ; ";
        first_row = false;
        out << "(";
        bool first = true;
        for (const ordered_json& v : row["output"]) {
          if (!first) out << ",";
          first = false;
          out << v.get<std::string>();
        }
        out << "): ";
        first = true;
        for (const ordered_json& f : row["prov"]) {
          if (!first) out << "*";
          first = false;
          out << f["ann"].get<std::string>();
          if (f.contains("pow")) out << "^" << f["pow"].get<int>();
        }
      }
      out << "\n";
    }
  }
  if (result.contains("stats")) {
    const ordered_json& stats = result["stats"];
    out << "  stats: choices=" << stats["choicesExamined"].get<long long>()
        << " privacyCalls=" << stats["privacyCalls"].get<long long>()
        << " cacheHits=" << stats["cacheHits"].get<long long>()
        << " capSkips=" << stats["capSkips"].get<long long>()
        << " elapsed=" << stats["elapsedSeconds"].get<double>() << "s\n";
  }
  return out.str();
}

int deliver(const CommonArgs& args, const std::string& payload, bool is_report) {
  std::string rendered = payload;
  if (is_report && args.format == "text") rendered = render_text(payload);
  if (args.out_path.empty()) {
    std::cout << rendered;
    return kExitOk;
  }
  std::ofstream out(args.out_path, std::ios::binary);
  if (!out) {
    std::cerr << "provabs: cannot write '" << args.out_path << "'\n";
    return kExitInputError;
  }
  out << rendered;
  return kExitOk;
}

using SearchFn = provabs_status (*)(const provabs_database*, const provabs_tree*,
                                    const provabs_example*, const char*, char**);

int run_search_command(const CommonArgs& args, SearchFn fn) {
  Handles handles;
  if (int rc = load_handles(args, true, handles)) return rc;
  ApiString report;
  provabs_status status =
      fn(handles.db, handles.tree, handles.example, build_options(args).c_str(), &report.value);
  if (report.value == nullptr) {
    std::cerr << "provabs: " << provabs_last_error() << "\n";
    return exit_code(status);
  }
  if (int rc = deliver(args, report.value, true)) return rc;
  if (status != PROVABS_OK && provabs_last_error()[0] != '\0') {
    std::cerr << "provabs: " << provabs_last_error() << "\n";
  }
  return exit_code(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"provenance abstraction: privacy-aware provenance publishing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", provabs_version());

  CommonArgs optimize_args, dual_args, oracle_args, privacy_args, loi_args, concretize_args,
      consistent_args, bench_args;

  CLI::App* optimize = app.add_subcommand(
      "optimize", "minimum-loss abstraction meeting a privacy threshold");
  add_common_flags(optimize, optimize_args, true);

  CLI::App* dual =
      app.add_subcommand("dual", "maximum-privacy abstraction under a loss budget");
  add_common_flags(dual, dual_args, true);

  CLI::App* oracle = app.add_subcommand("oracle", "brute-force search (correctness oracle)");
  add_common_flags(oracle, oracle_args, true);

  CLI::App* privacy =
      app.add_subcommand("privacy", "privacy of a given abstracted k-example");
  add_common_flags(privacy, privacy_args, true);

  CLI::App* loi = app.add_subcommand("loi", "loss of information of an abstracted k-example");
  add_common_flags(loi, loi_args, true);

  CLI::App* concretize =
      app.add_subcommand("concretize", "count or enumerate concretizations");
  add_common_flags(concretize, concretize_args, true);
  concretize->add_option("--row-prefix", concretize_args.row_prefix,
                         "restrict to the first N rows");
  concretize->add_flag("--count-only", concretize_args.count_only, "report the count only");

  CLI::App* consistent =
      app.add_subcommand("consistent", "consistent queries of a concrete example");
  add_common_flags(consistent, consistent_args, false);

  CLI::App* bench = app.add_subcommand("bench", "ablation sweep emitting CSV");
  add_common_flags(bench, bench_args, true);

  // generate has its own surface.
  std::string gen_out_prefix = "workload";
  int gen_relations = 2, gen_tuples = 50, gen_domain = 20, gen_leaves = 20, gen_height = 3,
      gen_branching = 3, gen_atoms = 2, gen_rows = 2;
  std::optional<int> gen_joins;
  unsigned gen_seed = 0;
  CLI::App* generate = app.add_subcommand("generate", "synthetic workload generator");
  generate->add_option("--relations", gen_relations, "number of relations");
  generate->add_option("--tuples", gen_tuples, "tuples per relation");
  generate->add_option("--domain", gen_domain, "constant domain size");
  generate->add_option("--leaves", gen_leaves, "tree leaf count");
  generate->add_option("--height", gen_height, "tree height");
  generate->add_option("--branching", gen_branching, "tree branching factor");
  generate->add_option("--atoms", gen_atoms, "query atom count");
  generate->add_option("--joins", gen_joins, "query join count (default atoms-1)");
  generate->add_option("--rows", gen_rows, "k-example rows");
  generate->add_option("--seed", gen_seed, "generator seed");
  generate->add_option("--out-prefix", gen_out_prefix,
                       "prefix for <prefix>_db.json, _tree.json, _example.json, _query.dl");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInputError;
  }

  if (optimize->parsed()) return run_search_command(optimize_args, provabs_optimize);
  if (dual->parsed()) return run_search_command(dual_args, provabs_dual);
  if (oracle->parsed()) return run_search_command(oracle_args, provabs_oracle);

  if (privacy->parsed()) {
    Handles handles;
    if (int rc = load_handles(privacy_args, true, handles)) return rc;
    ApiString report;
    provabs_status status = provabs_privacy(handles.db, handles.tree, handles.example,
                                            build_options(privacy_args).c_str(), &report.value);
    if (report.value == nullptr) {
      std::cerr << "provabs: " << provabs_last_error() << "\n";
      return exit_code(status);
    }
    if (int rc = deliver(privacy_args, report.value, true)) return rc;
    return exit_code(status);
  }

  if (loi->parsed() || concretize->parsed()) {
    const CommonArgs& args = loi->parsed() ? loi_args : concretize_args;
    Handles handles;
    if (int rc = load_handles(args, true, handles)) return rc;
    ApiString report;
    auto fn = loi->parsed() ? provabs_loi : provabs_concretize;
    provabs_status status = fn(handles.db, handles.tree, handles.example,
                               build_options(args).c_str(), &report.value);
    if (status != PROVABS_OK) {
      std::cerr << "provabs: " << provabs_last_error() << "\n";
      return exit_code(status);
    }
    return deliver(args, report.value, true);
  }

  if (consistent->parsed()) {
    Handles handles;
    if (int rc = load_handles(consistent_args, false, handles)) return rc;
    ApiString report;
    provabs_status status = provabs_consistent(handles.db, handles.example,
                                               build_options(consistent_args).c_str(),
                                               &report.value);
    if (status != PROVABS_OK) {
      std::cerr << "provabs: " << provabs_last_error() << "\n";
      return exit_code(status);
    }
    return deliver(consistent_args, report.value, true);
  }

  if (bench->parsed()) {
    Handles handles;
    if (int rc = load_handles(bench_args, true, handles)) return rc;
    ApiString csv;
    provabs_status status = provabs_bench(handles.db, handles.tree, handles.example,
                                          build_options(bench_args).c_str(), &csv.value);
    if (status != PROVABS_OK) {
      std::cerr << "provabs: " << provabs_last_error() << "\n";
      return exit_code(status);
    }
    return deliver(bench_args, csv.value, false);
  }

  if (generate->parsed()) {
    ordered_json spec;
    spec["relations"] = gen_relations;
    spec["tuplesPerRelation"] = gen_tuples;
    spec["domainSize"] = gen_domain;
    spec["leaves"] = gen_leaves;
    spec["height"] = gen_height;
    spec["branching"] = gen_branching;
    spec["atoms"] = gen_atoms;
    spec["joins"] = gen_joins.value_or(gen_atoms - 1);
    spec["rows"] = gen_rows;
    spec["seed"] = gen_seed;
    ApiString bundle;
    provabs_status status = provabs_generate(spec.dump().c_str(), &bundle.value);
    if (status != PROVABS_OK) {
      std::cerr << "provabs: " << provabs_last_error() << "\n";
      return exit_code(status);
    }
    ordered_json parsed = ordered_json::parse(std::string(bundle.value));
    struct OutFile {
      const char* key;
      const char* suffix;
    };
    for (const OutFile& f : {OutFile{"database", "_db.json"}, OutFile{"tree", "_tree.json"},
                             OutFile{"example", "_example.json"}, OutFile{"query", "_query.dl"}}) {
      std::string path = gen_out_prefix + f.suffix;
      std::ofstream out(path, std::ios::binary);
      if (!out) {
        std::cerr << "provabs: cannot write '" << path << "'\n";
        return kExitInputError;
      }
      std::string content = parsed[f.key].get<std::string>();
      out << content;
      if (f.key == std::string("query") && (content.empty() || content.back() != '\n')) {
        out << "\n";
      }
      std::cout << "wrote " << path << "\n";
    }
    return kExitOk;
  }

  return kExitInputError;
}
