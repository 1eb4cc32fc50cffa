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

#include "provabs.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "provabs/service.hpp"

struct provabs_database {
  provabs::KDatabase value;
};
struct provabs_tree {
  provabs::AbstractionTree value;
};
struct provabs_example {
  provabs::KExample value;
};

namespace {

thread_local std::string g_last_error;

provabs_status status_of(const provabs::Error& e) {
  switch (e.kind()) {
    case provabs::ErrorKind::CapExceeded:
    case provabs::ErrorKind::AlignmentExplosion:
      return PROVABS_CAP_EXCEEDED;
    default:
      return PROVABS_INPUT_ERROR;
  }
}

char* dup_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out == nullptr) return nullptr;
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

template <typename Fn>
provabs_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const provabs::Error& e) {
    g_last_error = std::string(provabs::error_kind_name(e.kind())) + ": " + e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PROVABS_INTERNAL_ERROR;
  } catch (...) {
    g_last_error = "unknown error";
    return PROVABS_INTERNAL_ERROR;
  }
}

provabs_status require_arguments(bool ok) {
  if (!ok) {
    g_last_error = "InvalidArgument: null argument";
    return PROVABS_INPUT_ERROR;
  }
  return PROVABS_OK;
}

std::string options_text(const char* options_json) {
  return options_json == nullptr ? std::string() : std::string(options_json);
}

provabs_status emit(const std::string& text, char** out) {
  *out = dup_string(text);
  if (*out == nullptr) {
    g_last_error = "out of memory";
    return PROVABS_INTERNAL_ERROR;
  }
  return PROVABS_OK;
}

provabs_status code_to_status(int outcome_code) {
  switch (outcome_code) {
    case 0:
      return PROVABS_OK;
    case 1:
      g_last_error = "no solution within the given constraints";
      return PROVABS_NO_SOLUTION;
    case 3:
      g_last_error = "a cap was exceeded; the result is incomplete";
      return PROVABS_CAP_EXCEEDED;
    default:
      return PROVABS_INTERNAL_ERROR;
  }
}

}  // namespace

extern "C" {

const char* provabs_version(void) { return "0.1.0"; }

const char* provabs_last_error(void) { return g_last_error.c_str(); }

void provabs_string_free(char* text) { std::free(text); }

provabs_status provabs_database_from_string(const char* text, provabs_database** out) {
  if (auto s = require_arguments(text != nullptr && out != nullptr)) return s;
  return guarded([&] {
    *out = new provabs_database{provabs::parse_database(text)};
    return PROVABS_OK;
  });
}

provabs_status provabs_database_from_file(const char* path, provabs_database** out) {
  if (auto s = require_arguments(path != nullptr && out != nullptr)) return s;
  return guarded([&] {
    *out = new provabs_database{provabs::load_database(path)};
    return PROVABS_OK;
  });
}

void provabs_database_free(provabs_database* db) { delete db; }

provabs_status provabs_tree_from_string(const char* text, provabs_tree** out) {
  if (auto s = require_arguments(text != nullptr && out != nullptr)) return s;
  return guarded([&] {
    *out = new provabs_tree{provabs::parse_tree(text)};
    return PROVABS_OK;
  });
}

provabs_status provabs_tree_from_file(const char* path, provabs_tree** out) {
  if (auto s = require_arguments(path != nullptr && out != nullptr)) return s;
  return guarded([&] {
    *out = new provabs_tree{provabs::load_tree(path)};
    return PROVABS_OK;
  });
}

void provabs_tree_free(provabs_tree* tree) { delete tree; }

provabs_status provabs_example_from_string(const char* text, provabs_example** out) {
  if (auto s = require_arguments(text != nullptr && out != nullptr)) return s;
  return guarded([&] {
    *out = new provabs_example{provabs::parse_kexample(text)};
    return PROVABS_OK;
  });
}

provabs_status provabs_example_from_file(const char* path, provabs_example** out) {
  if (auto s = require_arguments(path != nullptr && out != nullptr)) return s;
  return guarded([&] {
    *out = new provabs_example{provabs::load_kexample(path)};
    return PROVABS_OK;
  });
}

void provabs_example_free(provabs_example* example) { delete example; }

static provabs_status run_search(const provabs_database* db, const provabs_tree* tree,
                                 const provabs_example* example, const char* options_json,
                                 char** report_json, provabs::SearchMode mode, bool oracle) {
  if (auto s = require_arguments(db != nullptr && tree != nullptr && example != nullptr &&
                                 report_json != nullptr)) {
    return s;
  }
  return guarded([&]() -> provabs_status {
    provabs::service::Options options =
        provabs::service::parse_options(options_text(options_json));
    int code = 0;
    std::string report = provabs::service::optimize_report(db->value, tree->value, example->value,
                                                           options, mode, oracle, &code);
    if (auto s = emit(report, report_json)) return s;
    return code_to_status(code);
  });
}

provabs_status provabs_optimize(const provabs_database* db, const provabs_tree* tree,
                                const provabs_example* example, const char* options_json,
                                char** report_json) {
  return run_search(db, tree, example, options_json, report_json, provabs::SearchMode::Primal,
                    false);
}

provabs_status provabs_dual(const provabs_database* db, const provabs_tree* tree,
                            const provabs_example* example, const char* options_json,
                            char** report_json) {
  return run_search(db, tree, example, options_json, report_json, provabs::SearchMode::Dual,
                    false);
}

provabs_status provabs_oracle(const provabs_database* db, const provabs_tree* tree,
                              const provabs_example* example, const char* options_json,
                              char** report_json) {
  return run_search(db, tree, example, options_json, report_json, provabs::SearchMode::Primal,
                    true);
}

provabs_status provabs_privacy(const provabs_database* db, const provabs_tree* tree,
                               const provabs_example* example, const char* options_json,
                               char** report_json) {
  if (auto s = require_arguments(db != nullptr && tree != nullptr && example != nullptr &&
                                 report_json != nullptr)) {
    return s;
  }
  return guarded([&]() -> provabs_status {
    provabs::service::Options options =
        provabs::service::parse_options(options_text(options_json));
    int code = 0;
    std::string report = provabs::service::privacy_report(db->value, tree->value, example->value,
                                                          options, &code);
    if (auto s = emit(report, report_json)) return s;
    return code_to_status(code);
  });
}

provabs_status provabs_loi(const provabs_database* db, const provabs_tree* tree,
                           const provabs_example* example, const char* options_json,
                           char** report_json) {
  if (auto s = require_arguments(db != nullptr && tree != nullptr && example != nullptr &&
                                 report_json != nullptr)) {
    return s;
  }
  return guarded([&]() -> provabs_status {
    provabs::service::Options options =
        provabs::service::parse_options(options_text(options_json));
    return emit(provabs::service::loi_report(db->value, tree->value, example->value, options),
                report_json);
  });
}

provabs_status provabs_concretize(const provabs_database* db, const provabs_tree* tree,
                                  const provabs_example* example, const char* options_json,
                                  char** report_json) {
  if (auto s = require_arguments(db != nullptr && tree != nullptr && example != nullptr &&
                                 report_json != nullptr)) {
    return s;
  }
  return guarded([&]() -> provabs_status {
    provabs::service::Options options =
        provabs::service::parse_options(options_text(options_json));
    return emit(
        provabs::service::concretize_report(db->value, tree->value, example->value, options),
        report_json);
  });
}

provabs_status provabs_consistent(const provabs_database* db, const provabs_example* example,
                                  const char* options_json, char** report_json) {
  if (auto s = require_arguments(db != nullptr && example != nullptr && report_json != nullptr)) {
    return s;
  }
  return guarded([&]() -> provabs_status {
    provabs::service::Options options =
        provabs::service::parse_options(options_text(options_json));
    return emit(provabs::service::consistent_report(db->value, example->value, options),
                report_json);
  });
}

provabs_status provabs_generate(const char* spec_json, char** bundle_json) {
  if (auto s = require_arguments(bundle_json != nullptr)) return s;
  return guarded([&]() -> provabs_status {
    return emit(provabs::service::generate_bundle(options_text(spec_json)), bundle_json);
  });
}

provabs_status provabs_bench(const provabs_database* db, const provabs_tree* tree,
                             const provabs_example* example, const char* options_json,
                             char** csv_text) {
  if (auto s = require_arguments(db != nullptr && tree != nullptr && example != nullptr &&
                                 csv_text != nullptr)) {
    return s;
  }
  return guarded([&]() -> provabs_status {
    provabs::service::Options options =
        provabs::service::parse_options(options_text(options_json));
    return emit(provabs::service::bench_csv(db->value, tree->value, example->value, options),
                csv_text);
  });
}

}  // extern "C"
