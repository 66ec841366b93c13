#pragma once

// Adversarial instance generator for quadrant (dominance) queries.
//
// rho_w(i) rewrites i as lambda base-w digits, reverses them, and complements
// each digit d -> w-1-d.  It is a self-inverse bijection on [0, w^lambda), so
// the point set S = {(i, rho_w(i))} has all-distinct x and all-distinct y.
//
// Queries come from an implicit w-ary trie of depth lambda over the y values.
// A depth-d node owns a contiguous y range of size w^(lambda-d).  Its points,
// sorted by y, split into groups of w by picking every stride-th element
// (stride = w^(lambda-d-1)) starting from the smallest not yet picked.  Within
// a group, y ascends while x descends, so the group forms a staircase whose
// corner (min x, min y) defines an upper-right quadrant containing the group
// as exactly its minimal points.  Each depth contributes n/w queries, for
// lambda*n/w in total, and any two expected answers share at most one point.

#include <cstdint>
#include <vector>

#include "emsky/cpqa.hpp"
#include "emsky/geom.hpp"

namespace emsky {

// i written with lambda base-omega digits, reversed, each digit complemented.
// Requires omega >= 2, lambda >= 1, and 0 <= i < omega^lambda.
std::uint64_t rho(std::uint64_t i, std::uint64_t omega, std::uint64_t lambda);

// Instance size cap: EM_SKYLINE_SIZE_CAP from the environment, default 65536.
std::uint64_t adv_size_cap();

struct AdvQuery {
  QueryRect rect;               // Dominance quadrant [x_lo, inf) x [y_lo, inf)
  std::size_t depth = 0;        // trie depth of the node that spawned it
  std::vector<Point> expect;    // the group, sorted by less_x
};

struct AdvInput {
  std::uint64_t omega = 0;
  std::uint64_t lambda = 0;
  std::vector<Point> points;    // (i, rho(i)) with id = i, sorted by x
  std::vector<AdvQuery> queries;
};

// Builds the full instance for (omega, lambda).  Requires omega >= 2,
// lambda >= 1, and omega^lambda <= adv_size_cap().
AdvInput gen_input(std::uint64_t omega, std::uint64_t lambda);

// Re-derives every query's answer by brute force: the minimal points of
// S intersected with the quadrant (points dominating no other point there).
// Checks each answer equals the stored expectation, has exactly omega
// points, and that expectations pairwise share at most one point.  Reports
// the first violation found.
InvariantReport check_favorable(const AdvInput& inp);

}  // namespace emsky
