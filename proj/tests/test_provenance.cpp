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

#include <doctest.h>

#include <random>

#include "support.hpp"

using namespace provabs;
using namespace provabs::testing;

TEST_CASE("var_set collects all factor labels") {
  KExample ex = ex_real();
  CHECK(var_set(ex) == std::set<std::string>{"p1", "h1", "i1", "p2", "h2", "i2"});

  KExample empty;
  CHECK(var_set(empty).empty());

  // Powers do not multiply set membership.
  KExample hardness;
  hardness.output_arity = 1;
  hardness.rows.push_back(row({"1"}, {{"yes", 3}, {"ec", 2}}));
  CHECK(var_set(hardness) == std::set<std::string>{"yes", "ec"});

  // Node labels are excluded when the example is abstracted.
  CHECK(var_set(ex_abs1(), running_tree()) ==
        std::set<std::string>{"p1", "i1", "p2", "i2"});
}

TEST_CASE("monomial degree sums powers") {
  CHECK(monomial({{"p1", 1}, {"h1", 1}, {"i1", 1}}).degree() == 3);
  CHECK(monomial({{"a", 1}}).degree() == 1);
  CHECK(monomial({{"yes", 3}, {"ec", 2}}).degree() == 5);
}

TEST_CASE("relation skeleton resolves factors through the database") {
  KDatabase db = running_db();
  CHECK(relation_skeleton(monomial({{"p1", 1}, {"h1", 1}, {"i1", 1}}), db) ==
        std::multiset<std::string>{"Persons", "Hobbies", "Interests"});
  // c1 of Ex_abs3 replaces the interest with a hobby tuple.
  CHECK(relation_skeleton(monomial({{"p1", 1}, {"h1", 1}, {"h6", 1}}), db) ==
        std::multiset<std::string>{"Persons", "Hobbies", "Hobbies"});
  CHECK_THROWS_AS((void)relation_skeleton(monomial({{"zz", 1}}), db), Error);
  try {
    (void)relation_skeleton(monomial({{"zz", 1}}), db);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownAnnotation);
  }
}

TEST_CASE("polynomial keeps a canonical merged form") {
  Polynomial p;
  p.add(monomial({{"a", 1}, {"b", 2}}));
  p.add(monomial({{"b", 2}, {"a", 1}}));  // same factor map, merged
  p.add(monomial({{"a", 2}}));
  CHECK(p.size() == 2);
  Monomial probe = monomial({{"a", 1}, {"b", 2}});
  probe.coefficient = 2;
  CHECK(p.contains(probe));
  probe.coefficient = 3;
  CHECK_FALSE(p.contains(probe));
}

TEST_CASE("monomial multiplication is commutative and canonicalization idempotent") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<std::string, int>> factors;
    int n = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
      factors.emplace_back("a" + std::to_string(rng() % 5), 1 + static_cast<int>(rng() % 3));
    }
    Monomial forward;
    for (const auto& [label, power] : factors) forward.multiply(label, power);
    Monomial backward;
    for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
      backward.multiply(it->first, it->second);
    }
    CHECK(forward == backward);
  }
}

TEST_CASE("database validation catches broken invariants") {
  KDatabase db = running_db();
  CHECK_NOTHROW(db.validate());
  CHECK(db.require("p1").values == std::vector<std::string>{"1", "James T", "27"});
  CHECK(db.find("nope") == nullptr);

  KDatabase broken = running_db();
  broken.tuples["Hobbies"][0].values.pop_back();
  CHECK_THROWS_AS(broken.validate(), Error);
}

TEST_CASE("kexample validation enforces arity and positive powers") {
  KExample ex = ex_real();
  CHECK_NOTHROW(ex.validate());
  KExample bad = ex_real();
  bad.rows[0].output.push_back("extra");
  CHECK_THROWS_AS(bad.validate(), Error);
}
