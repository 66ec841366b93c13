#include <doctest.h>

#include <deque>
#include <random>
#include <string>

#include "emsky/pdeque.hpp"

using namespace emsky;

namespace {

template <class T>
std::vector<T> drain(const PDeque<T>& d) {
  return d.to_vector();
}

template <class T>
void check_matches(const PDeque<T>& d, const std::deque<T>& m) {
  REQUIRE(d.size() == m.size());
  REQUIRE(d.empty() == m.empty());
  if (!m.empty()) {
    CHECK(d.front() == m.front());
    CHECK(d.back() == m.back());
  }
  auto v = drain(d);
  REQUIRE(v.size() == m.size());
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == m[i]);
}

}  // namespace

TEST_SUITE("pdeque") {

TEST_CASE("basic end operations") {
  PDeque<int> d;
  CHECK(d.empty());
  CHECK(d.size() == 0);
  CHECK_THROWS_AS(d.front(), PreconditionError);
  CHECK_THROWS_AS(d.pop_back(), PreconditionError);

  d = d.push_back(2).push_back(3).push_front(1);
  CHECK(d.size() == 3);
  CHECK(d.front() == 1);
  CHECK(d.back() == 3);
  CHECK(drain(d) == std::vector<int>{1, 2, 3});

  auto popped = d.pop_front().pop_back();
  CHECK(drain(popped) == std::vector<int>{2});
  CHECK(drain(d) == std::vector<int>{1, 2, 3});  // original untouched
}

TEST_CASE("randomized ops against a reference deque") {
  std::mt19937_64 rng(42);
  PDeque<int> d;
  std::deque<int> m;
  for (int step = 0; step < 4000; ++step) {
    switch (rng() % 5) {
      case 0:
        d = d.push_front(static_cast<int>(step));
        m.push_front(static_cast<int>(step));
        break;
      case 1:
        d = d.push_back(static_cast<int>(step));
        m.push_back(static_cast<int>(step));
        break;
      case 2:
        if (!m.empty()) {
          CHECK(d.front() == m.front());
          d = d.pop_front();
          m.pop_front();
        }
        break;
      case 3:
        if (!m.empty()) {
          CHECK(d.back() == m.back());
          d = d.pop_back();
          m.pop_back();
        }
        break;
      default:
        CHECK(d.size() == m.size());
        break;
    }
    if (step % 251 == 0) check_matches(d, m);
  }
  check_matches(d, m);
}

TEST_CASE("concat over many size splits") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const int na = static_cast<int>(rng() % 40);
    const int nb = static_cast<int>(rng() % 40);
    PDeque<int> a, b;
    std::vector<int> want;
    for (int i = 0; i < na; ++i) {
      a = a.push_back(i);
      want.push_back(i);
    }
    for (int i = 0; i < nb; ++i) {
      b = b.push_back(100 + i);
      want.push_back(100 + i);
    }
    auto c = PDeque<int>::concat(a, b);
    CHECK(c.size() == static_cast<std::size_t>(na + nb));
    CHECK(drain(c) == want);
    // inputs unchanged
    CHECK(a.size() == static_cast<std::size_t>(na));
    CHECK(b.size() == static_cast<std::size_t>(nb));
  }
}

TEST_CASE("persistence across divergent histories") {
  PDeque<std::string> base = PDeque<std::string>::from({"a", "b", "c"});
  auto left = base.push_front("L");
  auto right = base.push_back("R").pop_front();
  CHECK(drain(base) == std::vector<std::string>{"a", "b", "c"});
  CHECK(drain(left) == std::vector<std::string>{"L", "a", "b", "c"});
  CHECK(drain(right) == std::vector<std::string>{"b", "c", "R"});
}

TEST_CASE("early-exit traversal and prefixes") {
  PDeque<int> d;
  for (int i = 0; i < 100; ++i) d = d.push_back(i);
  int seen = 0;
  bool finished = d.for_each_until([&](int) { return ++seen < 7; });
  CHECK_FALSE(finished);
  CHECK(seen == 7);
  CHECK(d.front_n(3) == std::vector<int>{0, 1, 2});
  CHECK(d.front_n(0).empty());
  CHECK(d.front_n(500).size() == 100);
}

TEST_CASE("nested deques") {
  PDeque<PDeque<int>> dd;
  for (int i = 0; i < 5; ++i) {
    PDeque<int> inner;
    for (int j = 0; j < 3; ++j) inner = inner.push_back(i * 10 + j);
    dd = dd.push_back(inner);
  }
  CHECK(dd.size() == 5);
  std::vector<int> flat;
  dd.for_each([&](const PDeque<int>& inner) {
    inner.for_each([&](int v) { flat.push_back(v); });
  });
  REQUIRE(flat.size() == 15);
  CHECK(flat.front() == 0);
  CHECK(flat.back() == 42);
  CHECK(dd.pop_front().front().front() == 10);
}

}  // TEST_SUITE
