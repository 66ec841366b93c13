#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "emsky/emblock.hpp"
#include "emsky/geom.hpp"

namespace emsky {

// Horizontal segment from the leftdom conversion: the owner point holds the
// strip [x_lo, x_hi) at height y until its leftmost dominator appears. The
// interval collapses to empty when the dominator shares the owner's x value
// (ids keep the sweep order total in that case).
struct Segment {
  std::int64_t x_lo = 0;
  std::int64_t x_hi = 0;  // half-open end; POS_INF when no dominator exists
  std::int64_t y = 0;
  std::uint64_t owner = 0;

  bool alive_at(std::int64_t x) const { return x_lo <= x && x < x_hi; }
  bool operator==(const Segment& o) const {
    return x_lo == o.x_lo && x_hi == o.x_hi && y == o.y && owner == o.owner;
  }
};

struct SigmaReport {
  bool ok = true;
  std::string what;  // first violation, empty on success
};

// Stack sweep over x-sorted points. Segments come out in non-descending order
// of their right endpoints, lower y first on ties. Charges the point stream,
// the emitted segment stream, and the modeled stack spill traffic.
std::vector<Segment> compute_sigma(BlockStore& st, std::span<const Point> pts);

// Nesting (pairwise) and monotonicity (at every endpoint abscissa) checks.
SigmaReport verify_sigma_properties(std::span<const Segment> segs);

namespace ppb {

struct Key {
  std::int64_t y = 0;
  std::uint64_t id = 0;
};
inline int cmp(const Key& a, const Key& b) {
  if (a.y != b.y) return a.y < b.y ? -1 : 1;
  if (a.id != b.id) return a.id < b.id ? -1 : 1;
  return 0;
}

struct Entry {
  Key key;
  std::int64_t px = 0;  // owner point's x at the leaf level
  BlockId child = 0;    // child node at internal levels
  std::int64_t x_start = 0;
  std::int64_t x_end = 0;  // POS_INF while alive
};

// A persistent node, alive over [x_create, x_copy). y_low is the routing key
// frozen at creation; the bottom node may later hold smaller keys, which the
// lowest-child fallback in the descent covers. succ links to the node
// directly above at creation time, which always outlives this one.
struct Node {
  std::int64_t x_create = 0;
  std::int64_t x_copy = 0;
  Key y_low;
  BlockId succ = 0;
  bool leaf = true;
  std::vector<Entry> entries;  // key-sorted; duplicate keys have disjoint lifespans
};

struct RootSlot {
  std::int64_t x_create = 0;
  BlockId id = 0;
};

// Static predecessor index over root versions, x_create-sorted. The version
// count is only bounded by the build size, so lookup must not scan the array.
struct RootIndexNode {
  bool leaf = true;
  std::vector<RootSlot> slots;                            // leaf level
  std::vector<std::pair<std::int64_t, BlockId>> kids;     // (first x_create, child)
};

}  // namespace ppb

// Static top-open skyline structure: a partially persistent B-tree over the
// leftdom segments for reporting, plus a static range-max B-tree that turns
// the query rectangle into a vertical stabbing segment.
class StaticTopOpen {
 public:
  // pts must be sorted by cmp_x; block capacity must be at least 8.
  static StaticTopOpen build(BlockStore& st, std::span<const Point> pts);

  // Skyline of pts inside [a1, a2] x [beta, inf), ascending x.
  SkylineAnswer query(std::int64_t a1, std::int64_t a2, std::int64_t beta) const;

  // Highest y among points with x in [a1, a2]; NEG_INF when none.
  std::int64_t range_max_y(std::int64_t a1, std::int64_t a2) const;

  std::size_t size() const { return n_; }
  std::size_t height() const { return counts_.size(); }
  std::size_t node_count(std::size_t level) const { return counts_.at(level); }

  // Input segments of each level: index 0 is Sigma(P), index 1 is Sigma_1
  // (bottom edges of the leaf rectangles), and so on, one past the top level.
  const std::vector<Segment>& sigma_of_level(std::size_t i) const { return sigmas_.at(i); }
  std::size_t sigma_levels() const { return sigmas_.size(); }

  // Diagnostics by peek (uncounted): the alive leaf entries at x as points,
  // bottom-up in y, i.e. the skyline staircase of the prefix up to x.
  std::vector<Point> snapshot_leaves(std::int64_t x) const;

 private:
  struct RmEntry {
    std::int64_t x_lo = 0, x_hi = 0;
    ppb::Key max_key;  // tie-broken maximum, so equal-y answers stay exact
    BlockId child = 0;
  };
  struct RmNode {
    bool leaf = true;
    std::vector<RmEntry> entries;
    std::vector<Point> pts;
  };

  const ppb::Node& fetch_node(BlockId id) const { return nodes_.at(id).fetch(); }
  const ppb::Node& peek_node(BlockId id) const { return nodes_.at(id).peek(); }
  const ppb::Node* root_at(std::int64_t x, bool counted) const;
  void build_roots(BlockStore& st, std::vector<ppb::RootSlot> slots);
  void build_rm(BlockStore& st, std::span<const Point> pts);
  bool rm_max_key(std::int64_t a1, std::int64_t a2, ppb::Key& best) const;
  bool rm_max(const RmNode& nd, std::int64_t a1, std::int64_t a2, ppb::Key& best) const;

  BlockStore* st_ = nullptr;
  std::size_t n_ = 0;
  std::unordered_map<BlockId, BlockRef<ppb::Node>> nodes_;
  std::unordered_map<BlockId, BlockRef<ppb::RootIndexNode>> roots_;
  BlockId roots_root_ = 0;
  std::vector<std::size_t> counts_;
  std::vector<std::vector<Segment>> sigmas_;
  std::unordered_map<BlockId, BlockRef<RmNode>> rm_;
  BlockId rm_root_ = 0;
};

}  // namespace emsky
