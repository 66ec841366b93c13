#pragma once

// Four-sided range skyline structure. A weight-balanced base tree with fan
// f ~ (n/B)^eps / log(n/B) keeps its height constant; every non-root
// internal node u owns a right-open substructure R(u): a dynamic top-open
// tree over the axis-swapped points of u's subtree (built at eps 0, so a
// y-banded skyline query on P(u) costs O(log(|P(u)|/B)) transfers).
//
// A query walks the two boundary paths, lists the maximal fully-contained
// children in descending x order, and sweeps right to left: the highest
// reported y so far becomes the floor of the next node's band query, which
// is what keeps points dominated from the right out of the answer. Updates
// touch one R per level; rebalancing rebuilds the R of every node whose
// subtree changed, and the whole structure is rebuilt from scratch after
// n/2 updates so the fan tracks n.
//
// Point ids must be unique across the set: the swapped substructures key on
// (y, id), so a repeated id with a repeated y is rejected as a duplicate.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "emsky/dynamic_topopen.hpp"
#include "emsky/emblock.hpp"
#include "emsky/geom.hpp"

namespace emsky {

class FourSided {
 public:
  // pts strictly sorted by cmp_x with distinct (y, id) pairs; 0 < eps <= 1.
  static FourSided build_sorted(BlockStore& st, std::span<const Point> pts, double eps);

  ~FourSided() = default;
  FourSided(FourSided&&) noexcept = default;
  FourSided& operator=(FourSided&&) noexcept = default;
  FourSided(const FourSided&) = delete;
  FourSided& operator=(const FourSided&) = delete;

  // Maximal points of P inside [x_lo,x_hi] x [y_lo,y_hi], sorted by less_x.
  // Unbounded sides are just extreme values.
  SkylineAnswer query(std::int64_t x_lo, std::int64_t x_hi, std::int64_t y_lo,
                      std::int64_t y_hi) const;
  SkylineAnswer query(const QueryRect& q) const { return query(q.x_lo, q.x_hi, q.y_lo, q.y_hi); }

  // insert rejects a point whose (x, id) is already present; erase requires
  // the exact point (x, y, id).
  void insert(const Point& p);
  void erase(const Point& p);

  std::size_t size() const { return n_; }
  std::size_t height() const;
  std::size_t fan_f() const { return f_; }
  double eps() const { return eps_; }
  std::size_t updates_since_rebuild() const { return updates_; }
  std::size_t rebuilds() const { return rebuilds_; }

  // --- uncounted test observers ---
  struct NodeProbe {
    std::size_t depth = 0;
    std::size_t kids = 0;  // 0 for leaves
    bool has_r = false;
    std::vector<Point> pts;  // subtree points in cmp_x order
  };
  std::vector<NodeProbe> probe_nodes() const;
  // Balance ranges, routing blocks, leaf payload identity, and for every
  // non-root internal node that R(u) passes its own checker and holds
  // exactly the axis-swapped subtree points. Peeks only.
  InvariantReport check_structure() const;

 private:
  struct Node {
    bool leaf = true;
    std::vector<Point> pts;
    BlockRef<std::vector<Point>> blk;
    std::vector<std::unique_ptr<Node>> kids;
    BlockRef<std::vector<Point>> keys;  // [lo0, hi0, lo1, hi1, ...]
    std::unique_ptr<DynTopOpen> r;      // null at the root and at leaves
    Point lo{}, hi{};
  };

  FourSided() = default;

  void init_from(std::span<const Point> pts);
  std::unique_ptr<Node> make_leaf(std::span<const Point> pts) const;
  void refresh_leaf(Node& u) const;
  void refresh_keys(Node& u) const;
  void build_r(Node& u, std::span<const Point> subtree) const;
  void rebuild_r(Node& u) const;
  void gather_points(const Node& u, bool charge, std::vector<Point>& out) const;
  void maybe_rebuild();

  BlockStore* st_ = nullptr;
  double eps_ = 0.5;
  std::size_t f_ = 2;
  std::size_t n_ = 0;
  std::size_t n0_ = 0;
  std::size_t updates_ = 0;
  std::size_t rebuilds_ = 0;
  std::unique_ptr<Node> root_;
};

}  // namespace emsky
