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

#ifndef PROVABS_SERVICE_HPP
#define PROVABS_SERVICE_HPP

#include <optional>
#include <string>

#include "provabs/io.hpp"

// Operation layer behind the C API: parses option documents, runs the
// requested computation and renders a machine-readable JSON report with
// stable field ordering. Outcome codes mirror the CLI exit codes:
// 0 ok, 1 no solution / below threshold, 3 cap exceeded (incomplete).

namespace provabs::service {

struct Options {
  int threshold = 1;
  std::optional<double> loi_max;
  std::string distribution = "uniform";  // uniform | weighted | file:<path>
  OptimizerCaps caps;
  SearchToggles toggles;
  CimDef cim_def = CimDef::Algorithmic;
  bool trivial_exclusion = false;
  unsigned seed = 0;
  std::optional<int> row_prefix;
  bool count_only = false;
};

// Strict parse: unknown keys are rejected. Accepts an empty string as "all
// defaults".
Options parse_options(const std::string& options_json);

LossModel resolve_loss(const Options& options);

std::string optimize_report(const KDatabase& db, const AbstractionTree& tree,
                            const KExample& example, const Options& options, SearchMode mode,
                            bool oracle, int* outcome_code);

std::string privacy_report(const KDatabase& db, const AbstractionTree& tree,
                           const KExample& abstracted, const Options& options,
                           int* outcome_code);

std::string loi_report(const KDatabase& db, const AbstractionTree& tree,
                       const KExample& abstracted, const Options& options);

std::string concretize_report(const KDatabase& db, const AbstractionTree& tree,
                              const KExample& abstracted, const Options& options);

std::string consistent_report(const KDatabase& db, const KExample& concrete,
                              const Options& options);

// {"database":.., "tree":.., "example":.., "query":..} with the file texts.
std::string generate_bundle(const std::string& spec_json);

// Ablation sweep over the toggle configurations, one CSV row each.
std::string bench_csv(const KDatabase& db, const AbstractionTree& tree, const KExample& example,
                      const Options& options);

}  // namespace provabs::service

#endif  // PROVABS_SERVICE_HPP
