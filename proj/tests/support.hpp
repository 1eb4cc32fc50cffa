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

#ifndef PROVABS_TESTS_SUPPORT_HPP
#define PROVABS_TESTS_SUPPORT_HPP

#include <string>

#include "provabs/io.hpp"
#include "provabs/service.hpp"

namespace provabs::testing {

#ifndef PROVABS_FIXTURE_DIR
#define PROVABS_FIXTURE_DIR "tests/fixtures"
#endif

inline std::string fixture_path(const std::string& name) {
  return std::string(PROVABS_FIXTURE_DIR) + "/" + name;
}

// The hobbies/interests/persons instance used throughout: two persons, six
// hobby rows, six interest rows.
inline KDatabase running_db() {
  return load_database(fixture_path("running_db.json"));
}

// Source tree: * -> {Social Network -> {Facebook{h1,h3,h4,i2,i5},
// LinkedIn{h2,h5,i3}}, WikiLeaks{h6,i1,i4,i6}}.
inline AbstractionTree running_tree() {
  return load_tree(fixture_path("running_tree.json"));
}

inline KExample ex_real() { return load_kexample(fixture_path("ex_real.json")); }
inline KExample ex_abs1() { return load_kexample(fixture_path("ex_abs1.json")); }
inline KExample ex_abs2() { return load_kexample(fixture_path("ex_abs2.json")); }
inline KExample ex_abs3() { return load_kexample(fixture_path("ex_abs3.json")); }
inline KExample ex_false1() { return load_kexample(fixture_path("ex_false1.json")); }

inline ConjunctiveQuery q_real() {
  return parse_query(
      "Q(id) :- Persons(id,name,age), Hobbies(id,'Dance',src1), Interests(id,'Music',src2)");
}
inline ConjunctiveQuery q_false1() {
  return parse_query(
      "Q(id) :- Persons(id,name,age), Hobbies(id,'Trips',src1), Interests(id,'Music',src2)");
}
inline ConjunctiveQuery q_false2() {
  return parse_query(
      "Q(id) :- Persons(id,name,age), Hobbies(id,'Dance',src1), Interests(id,'Parties',src2)");
}
inline ConjunctiveQuery q_general() {
  return parse_query(
      "Q(id) :- Persons(id,name,age), Hobbies(id,'Dance',src1), Interests(id,interest,src2)");
}

inline Monomial monomial(std::initializer_list<std::pair<std::string, int>> factors) {
  Monomial m;
  for (const auto& [label, power] : factors) m.multiply(label, power);
  return m;
}

inline KExampleRow row(std::vector<std::string> output,
                       std::initializer_list<std::pair<std::string, int>> factors) {
  KExampleRow r;
  r.output = std::move(output);
  r.provenance = monomial(factors);
  return r;
}

inline bool same_query_set(const std::vector<ConjunctiveQuery>& got,
                           const std::vector<ConjunctiveQuery>& expected) {
  if (got.size() != expected.size()) return false;
  for (const ConjunctiveQuery& e : expected) {
    bool found = false;
    for (const ConjunctiveQuery& g : got) {
      if (equivalent(g, e)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

inline bool set_contains(const std::vector<ConjunctiveQuery>& got, const ConjunctiveQuery& q) {
  for (const ConjunctiveQuery& g : got) {
    if (equivalent(g, q)) return true;
  }
  return false;
}

}  // namespace provabs::testing

#endif  // PROVABS_TESTS_SUPPORT_HPP
