#pragma once

// Dynamic top-open range skyline structure. An (a,2a)-tree indexes the
// points in cmp_x order; every node carries an immutable Cpqa version over
// the mirrored points of its subtree (key ybar = -y, so attrition equals
// dominance), and every internal node stores a representative block holding
// copies of each child queue's critical records. Reading that one block
// (counted) is what makes the child queues' critical records legitimately
// memory-resident, so the catenation sequence at a node costs O(1) transfers.
//
// Queries fold the maximal fully-contained subtrees of [a1,a2], left to
// right, into one auxiliary queue and pop reports until the key rises above
// -beta. Updates rebuild the queue of every node on the root path (plus
// rebalancing partners) bottom-up from the children's current versions.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "emsky/cpqa.hpp"
#include "emsky/emblock.hpp"
#include "emsky/geom.hpp"

namespace emsky {

// Mirrored attrition element of p: key = -y, aux carries x.
Elem mirror_elem(const Point& p);

// Survivors of inserting pts (strictly cmp_x-sorted) into a queue with
// attrition, in queue order: the elements no later element kills. By the
// mirroring duality these are exactly the skyline points of pts.
std::vector<Elem> mirrored_staircase(std::span<const Point> pts);

class DynTopOpen {
 public:
  // pts strictly sorted by cmp_x; 0 <= eps <= 1.
  static DynTopOpen build_sorted(BlockStore& st, std::span<const Point> pts, double eps);

  ~DynTopOpen();
  DynTopOpen(DynTopOpen&&) noexcept = default;
  DynTopOpen& operator=(DynTopOpen&&) noexcept;
  DynTopOpen(const DynTopOpen&) = delete;
  DynTopOpen& operator=(const DynTopOpen&) = delete;

  // Maximal points of P inside [a1,a2] x [beta, inf), sorted by less_x.
  SkylineAnswer query(std::int64_t a1, std::int64_t a2, std::int64_t beta) const;

  // insert rejects a point whose (x, id) is already present; erase requires
  // the exact point (x, y, id).
  void insert(const Point& p);
  void erase(const Point& p);

  std::size_t size() const { return n_; }
  std::size_t height() const;
  std::size_t fan_a() const { return a_; }
  std::size_t buffer_b() const { return b_; }
  double eps() const { return eps_; }

  // --- uncounted test observers ---
  struct NodeProbe {
    CpqaPtr q;
    std::vector<Point> pts;  // subtree points in cmp_x order
    std::size_t kids = 0;    // 0 for leaves
    std::size_t depth = 0;
  };
  std::vector<NodeProbe> probe_nodes() const;
  CpqaPtr root_queue() const;
  // Balance ranges, routing keys, leaf payload identity, representative
  // block identity, root pin set, size bookkeeping. Peeks only.
  InvariantReport check_structure() const;

 private:
  struct RepRecord {
    BlockId id = 0;
    std::vector<Elem> elems;
  };
  struct RepChild {
    std::vector<RepRecord> recs;
  };
  using RepPayload = std::vector<RepChild>;

  struct Node {
    bool leaf = true;
    std::vector<Point> pts;                    // leaf only
    BlockRef<std::vector<Point>> blk;          // leaf payload in the store
    std::vector<std::unique_ptr<Node>> kids;   // internal only
    Point lo{}, hi{};                          // cmp_x extremes of the subtree
    CpqaPtr q;
    BlockRef<RepPayload> rep;                  // internal only
  };

  DynTopOpen() = default;

  void rebuild_leaf(Node& u) const;
  void rebuild_internal(Node& u, bool charge_rep_fetch) const;
  void resync_root_pins();
  void release_root_pins();
  CpqaPtr fold_children(const Node& u, std::size_t from, std::size_t to) const;
  CpqaPtr leaf_range_queue(const Node& u, std::int64_t a1, std::int64_t a2) const;

  BlockStore* st_ = nullptr;
  double eps_ = 0;
  std::size_t a_ = 2;
  std::size_t b_ = 1;
  std::size_t n_ = 0;
  std::unique_ptr<Node> root_;
  std::vector<BlockId> root_pins_;
};

}  // namespace emsky
