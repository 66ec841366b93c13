#pragma once

// Reference models kept deliberately naive: flat sorted vectors and linear
// scans, maintained by the literal set definitions. The queue implementation
// is checked against these, never the other way around.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "emsky/cpqa.hpp"

namespace emsky::ref {

// Priority queue with attrition over Elem, totally ordered by elem_less.
// Contents are always the alive staircase: strictly increasing, minimum first.
struct RefPqa {
  std::vector<Elem> v;

  bool empty() const { return v.empty(); }
  std::size_t size() const { return v.size(); }

  const Elem& find_min() const { return v.front(); }

  Elem delete_min() {
    Elem e = v.front();
    v.erase(v.begin());
    return e;
  }

  // Q1' = {e in Q1 | e < min(Q2)} union Q2
  static RefPqa catenate(RefPqa a, const RefPqa& b) {
    if (b.v.empty()) return a;
    const Elem& cut = b.v.front();
    auto it = std::lower_bound(a.v.begin(), a.v.end(), cut, elem_less);
    a.v.erase(it, a.v.end());
    a.v.insert(a.v.end(), b.v.begin(), b.v.end());
    return a;
  }

  void insert(Elem e) {
    RefPqa s;
    s.v.push_back(e);
    *this = catenate(std::move(*this), s);
  }

  static RefPqa from_sorted(std::vector<Elem> elems) {
    RefPqa r;
    r.v = std::move(elems);
    return r;
  }
};

}  // namespace emsky::ref
