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

#include <functional>
#include <random>

#include "support.hpp"

using namespace provabs;
using namespace provabs::testing;

namespace {

// Independent derivation oracle: full cross product over candidate tuples per
// atom, constraints checked on complete assignments only.
std::map<std::vector<std::string>, Polynomial> evaluate_by_cross_product(
    const ConjunctiveQuery& q, const KDatabase& db) {
  std::map<std::vector<std::string>, Polynomial> out;
  std::vector<const std::vector<AnnotatedTuple>*> pools;
  for (const Atom& atom : q.body) {
    auto it = db.tuples.find(atom.relation);
    if (it == db.tuples.end() || it->second.empty()) return out;
    pools.push_back(&it->second);
  }
  std::vector<std::size_t> pick(q.body.size(), 0);
  while (true) {
    std::map<std::string, std::string> binding;
    bool ok = true;
    for (std::size_t a = 0; a < q.body.size() && ok; ++a) {
      const AnnotatedTuple& tuple = (*pools[a])[pick[a]];
      for (std::size_t c = 0; c < q.body[a].terms.size() && ok; ++c) {
        const Term& t = q.body[a].terms[c];
        if (!t.is_variable) {
          ok = t.text == tuple.values[c];
        } else {
          auto [it, inserted] = binding.emplace(t.text, tuple.values[c]);
          if (!inserted) ok = it->second == tuple.values[c];
        }
      }
    }
    if (ok) {
      std::vector<std::string> output;
      for (const Term& t : q.head) output.push_back(t.is_variable ? binding.at(t.text) : t.text);
      Monomial m;
      for (std::size_t a = 0; a < q.body.size(); ++a) {
        m.multiply((*pools[a])[pick[a]].annotation);
      }
      out[output].add(m);
    }
    std::size_t a = pick.size();
    bool advanced = false;
    while (a-- > 0) {
      if (++pick[a] < pools[a]->size()) {
        advanced = true;
        break;
      }
      pick[a] = 0;
    }
    if (!advanced) break;
  }
  return out;
}

bool connected_by_union_find(const ConjunctiveQuery& q) {
  std::vector<int> parent(q.body.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (const auto& [a, b] : join_graph_edges(q)) parent[find(a)] = find(b);
  for (std::size_t i = 1; i < parent.size(); ++i) {
    if (find(static_cast<int>(i)) != find(0)) return false;
  }
  return true;
}

ConjunctiveQuery random_query(std::mt19937& rng, const KDatabase& db) {
  ConjunctiveQuery q;
  int atoms = 1 + static_cast<int>(rng() % 3);
  std::vector<std::string> vars{"x0", "x1", "x2", "x3"};
  for (int a = 0; a < atoms; ++a) {
    const RelationSchema& schema = db.relations[rng() % db.relations.size()];
    Atom atom;
    atom.relation = schema.name;
    for (std::size_t c = 0; c < schema.arity(); ++c) {
      if (rng() % 4 == 0) {
        const auto& pool = db.tuples.at(schema.name);
        atom.terms.push_back(Term::constant(pool[rng() % pool.size()].values[c]));
      } else {
        atom.terms.push_back(Term::variable(vars[rng() % vars.size()]));
      }
    }
    q.body.push_back(std::move(atom));
  }
  for (const Atom& atom : q.body) {
    for (const Term& t : atom.terms) {
      if (t.is_variable) {
        q.head.push_back(t);
        return q;
      }
    }
  }
  q.head.push_back(q.body[0].terms[0]);
  return q;
}

}  // namespace

TEST_CASE("parse and print round-trip the running-example queries") {
  ConjunctiveQuery q = q_real();
  CHECK(q.head.size() == 1);
  CHECK(q.body.size() == 3);
  CHECK(q.body[1].terms[1] == Term::constant("Dance"));
  ConjunctiveQuery reparsed = parse_query(print_query(q));
  CHECK(equivalent(q, reparsed));

  CHECK_THROWS_AS((void)parse_query("Q(id) :- "), Error);
  CHECK_THROWS_AS((void)parse_query("Q(id) Persons(id)"), Error);
  CHECK_THROWS_AS((void)parse_query("Q(id) :- Persons(id,'unterminated"), Error);
  // Head variables must occur in the body.
  CHECK_THROWS_AS((void)parse_query("Q(zz) :- Persons(id,n,a)"), Error);
  // Comments and whitespace are ignored.
  ConjunctiveQuery commented =
      parse_query("% the real query\nQ(id) :- Persons(id,name,age),\n  Hobbies(id,'Dance',s1),"
                  " Interests(id,'Music',s2)");
  CHECK(equivalent(commented, q_real()));
}

TEST_CASE("evaluation matches the running example") {
  KDatabase db = running_db();
  auto results = evaluate(q_real(), db);
  REQUIRE(results.size() == 2);
  CHECK(results.at({"1"}).contains(monomial({{"p1", 1}, {"h1", 1}, {"i1", 1}})));
  CHECK(results.at({"2"}).contains(monomial({{"p2", 1}, {"h2", 1}, {"i2", 1}})));
  CHECK(results.at({"1"}).size() == 1);

  // A constant with no matches yields an empty result.
  auto empty = evaluate(parse_query("Q(id) :- Persons(id,'Nobody',age)"), db);
  CHECK(empty.empty());

  // Q_general picks up both interests of person 1.
  auto general = evaluate(q_general(), db);
  CHECK(general.at({"1"}).contains(monomial({{"p1", 1}, {"h1", 1}, {"i1", 1}})));
  CHECK(general.at({"1"}).contains(monomial({{"p1", 1}, {"h1", 1}, {"i4", 1}})));
  CHECK(general.at({"1"}).size() == 2);

  CHECK_THROWS_AS((void)evaluate(parse_query("Q(x) :- Nope(x)"), db), Error);
}

TEST_CASE("evaluation uses per-atom products for repeated tuples") {
  KDatabase db = running_db();
  // Self-join that matches the same tuple twice: annotation squared.
  auto results = evaluate(parse_query("Q(p) :- Hobbies(p,h,s), Hobbies(p,h,s)"), db);
  CHECK(results.at({"1"}).contains(monomial({{"h1", 2}})));
}

TEST_CASE("evaluation agrees with the cross-product oracle on random queries") {
  KDatabase db = running_db();
  std::mt19937 rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    ConjunctiveQuery q = random_query(rng, db);
    auto fast = evaluate(q, db);
    auto slow = evaluate_by_cross_product(q, db);
    CHECK(fast == slow);
  }
}

TEST_CASE("join-graph connectivity") {
  CHECK(is_connected_query(q_real()));
  CHECK_FALSE(is_connected_query(
      parse_query("Q(a) :- Persons(a,p,q), Hobbies(r,s,t), Interests(u,v,w)")));
  CHECK(is_connected_query(parse_query("Q(a) :- Persons(a,b,c)")));

  KDatabase db = running_db();
  std::mt19937 rng(5);
  for (int trial = 0; trial < 80; ++trial) {
    ConjunctiveQuery q = random_query(rng, db);
    CHECK(is_connected_query(q) == connected_by_union_find(q));
  }
}

TEST_CASE("containment follows the homomorphism criterion") {
  CHECK(contains(q_general(), q_real()));
  CHECK_FALSE(contains(q_real(), q_general()));
  CHECK(contains(q_real(), q_real()));

  SUBCASE("reflexive and transitive on samples") {
    KDatabase db = running_db();
    std::mt19937 rng(31);
    std::vector<ConjunctiveQuery> pool{q_real(), q_false1(), q_false2(), q_general()};
    for (int i = 0; i < 10; ++i) {
      ConjunctiveQuery q = random_query(rng, db);
      if (q.head.size() == 1) pool.push_back(q);
    }
    for (const auto& a : pool) CHECK(contains(a, a));
    for (const auto& a : pool) {
      for (const auto& b : pool) {
        for (const auto& c : pool) {
          if (contains(a, b) && contains(b, c)) CHECK(contains(a, c));
        }
      }
    }
  }
}

TEST_CASE("containment implies monomial-level result containment") {
  // If inner is contained in outer, every monomial of inner's result shows up
  // in outer's result for the same output.
  KDatabase db = running_db();
  std::mt19937 rng(47);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 30; ++trial) {
    ConjunctiveQuery a = random_query(rng, db);
    ConjunctiveQuery b = random_query(rng, db);
    if (a.head.size() != b.head.size()) continue;
    if (!contains(a, b)) continue;  // b is contained in a
    ++checked;
    auto inner = evaluate(b, db);
    auto outer = evaluate(a, db);
    for (const auto& [output, poly] : inner) {
      auto it = outer.find(output);
      REQUIRE(it != outer.end());
      for (const auto& [factors, coeff] : poly.terms) {
        (void)coeff;
        Monomial m;
        m.factors = factors;
        CHECK(it->second.contains(m));
      }
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("equivalence is an equivalence relation and respects renaming") {
  ConjunctiveQuery renamed = parse_query(
      "Q(a) :- Persons(a,b,c), Hobbies(a,'Dance',d), Interests(a,'Music',e)");
  CHECK(equivalent(q_real(), renamed));
  CHECK_FALSE(equivalent(q_real(), q_general()));
  CHECK_FALSE(equivalent(q_real(), q_false1()));

  // Redundant atom: same query up to equivalence.
  ConjunctiveQuery redundant = parse_query(
      "Q(id) :- Persons(id,name,age), Persons(id,n2,a2), Hobbies(id,'Dance',s1),"
      " Interests(id,'Music',s2)");
  CHECK(equivalent(q_real(), redundant));
}
