#include "emsky/static_topopen.hpp"

#include <algorithm>
#include <deque>
#include <memory>
#include <string>
#include <utility>

namespace emsky {

namespace {

using ppb::Entry;
using ppb::Key;
using ppb::Node;

void require_sorted(std::span<const Point> pts) {
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (cmp_x(pts[i - 1], pts[i]) >= 0)
      throw PreconditionError("points not strictly sorted by x");
}

std::uint64_t stream_blocks(std::size_t items, std::size_t cap) {
  return items == 0 ? 0 : static_cast<std::uint64_t>((items + cap - 1) / cap);
}

// One timeline event at a level boundary. Inserts carry the serial of the
// node created below; the block id is patched in once that level finishes.
struct Ev {
  std::int64_t x = 0;
  bool ins = false;
  Key key;
  std::int64_t px = 0;
  std::uint32_t serial = 0;
  BlockId child = 0;
};

struct Slot {
  BlockId id = 0;
  std::int64_t x_create = 0;
  std::int64_t x_copy = POS_INF;
  Key y_low;
};

struct LevelOut {
  std::vector<Slot> slots;      // creation order
  std::vector<Ev> next_events;  // chronological
  std::vector<Segment> sigma;   // bottom edges, finalization order
  std::size_t max_alive = 0;
};

// Output-order contract for sigma lists: non-descending right endpoint,
// lower y first on ties (ids break exact ties). The sweep emits pops grouped
// by the dominating arrival instead, so results get one sort pass.
void sort_sigma(std::vector<Segment>& segs) {
  std::sort(segs.begin(), segs.end(), [](const Segment& a, const Segment& b) {
    if (a.x_hi != b.x_hi) return a.x_hi < b.x_hi;
    if (a.y != b.y) return a.y < b.y;
    return a.owner < b.owner;
  });
}

// Sweep over x-sorted points: maintain the staircase of undominated prefixes
// on a stack; an arrival kills every weaker stack top, closing their strips.
void sweep(std::span<const Point> pts, std::vector<Segment>& sigma, std::vector<Ev>* evs) {
  std::vector<Point> stack;
  sigma.reserve(pts.size());
  for (const Point& p : pts) {
    while (!stack.empty() && cmp_y(stack.back(), p) < 0) {
      const Point& q = stack.back();
      sigma.push_back({q.x, p.x, q.y, q.id});
      if (evs) evs->push_back({p.x, false, Key{q.y, q.id}, 0, 0, 0});
      stack.pop_back();
    }
    if (evs) evs->push_back({p.x, true, Key{p.y, p.id}, p.x, 0, 0});
    stack.push_back(p);
  }
  for (std::size_t i = stack.size(); i-- > 0;)
    sigma.push_back({stack[i].x, POS_INF, stack[i].y, stack[i].id});
}

// Builds one level of the persistent tree from the event stream of the level
// below. Only the bottom node of the current snapshot mutates; it lives in
// memory and is written out when it version-copies or the build ends. Nodes
// above it are frozen and already on disk; an underflow pulls the successor's
// content down into a fresh bottom node rather than editing it in place.
class LevelBuilder {
 public:
  LevelBuilder(BlockStore& st, bool leaf, std::unordered_map<BlockId, BlockRef<Node>>& nodes)
      : st_(&st), B_(st.block_capacity()), leaf_(leaf), nodes_(&nodes) {}

  void insert(std::int64_t x, Key key, std::int64_t px, BlockId child) {
    if (has_cur_ && cur_.entries.size() >= B_) version_copy(x);
    if (!has_cur_) {
      start_cur(x, {Entry{key, px, child, x, POS_INF}}, above_.empty() ? 0 : above_.front().id);
    } else {
      const Entry* low = lowest_alive();
      EMSKY_REQUIRE(low == nullptr || ppb::cmp(key, low->key) < 0,
                    "ppb: insert above the bottom of the snapshot");
      auto it = std::lower_bound(
          cur_.entries.begin(), cur_.entries.end(), key,
          [](const Entry& e, const Key& k) { return ppb::cmp(e.key, k) < 0; });
      cur_.entries.insert(it, Entry{key, px, child, x, POS_INF});
      ++cur_.live;
    }
    note_alive();
  }

  void erase(std::int64_t x, Key key) {
    EMSKY_REQUIRE(has_cur_ && cur_.live > 0, "ppb: delete with no alive bottom node");
    Entry* low = lowest_alive();
    EMSKY_REQUIRE(low != nullptr && ppb::cmp(low->key, key) == 0,
                  "ppb: delete not at the bottom of the snapshot");
    low->x_end = x;
    --cur_.live;
    // Version underflow fires at delete time; waiting for the node to fill
    // would let collapse cascades spawn one thin node per node below and the
    // levels would stop shrinking.
    if (cur_.live * 4 < B_) {
      if (!above_.empty()) {
        version_copy(x);
      } else if (cur_.live == 0) {
        finalize_cur(x, true);  // the level drained completely
        has_cur_ = false;
      }
      // else: the bottom arm is the whole level; let it run small
    }
    note_alive();
  }

  LevelOut finish() {
    if (has_cur_) {
      finalize_cur(POS_INF, false);
      has_cur_ = false;
    }
    for (const Above& a : above_) {
      const Slot& s = out_.slots[a.serial];
      out_.sigma.push_back({s.x_create, POS_INF, s.y_low.y, s.y_low.id});
    }
    above_.clear();
    return std::move(out_);
  }

 private:
  struct Cur {
    std::uint32_t serial = 0;
    std::int64_t x_create = 0;
    Key y_low;
    BlockId self = 0;  // nonzero once written
    BlockId succ = 0;
    std::vector<Entry> entries;
    std::size_t live = 0;
  };
  struct Above {
    BlockId id = 0;
    std::uint32_t serial = 0;
  };

  Entry* lowest_alive() {
    for (Entry& e : cur_.entries)
      if (e.x_end == POS_INF) return &e;
    return nullptr;
  }

  void note_alive() {
    std::size_t alive = (has_cur_ ? 1 : 0) + above_.size();
    out_.max_alive = std::max(out_.max_alive, alive);
  }

  std::uint32_t new_slot(std::int64_t x, Key y_low) {
    out_.slots.push_back({0, x, POS_INF, y_low});
    return static_cast<std::uint32_t>(out_.slots.size() - 1);
  }

  void start_cur(std::int64_t x, std::vector<Entry> entries, BlockId succ) {
    Key y_low = entries.front().key;
    cur_ = Cur{new_slot(x, y_low), x, y_low, 0, succ, std::move(entries), 0};
    cur_.live = cur_.entries.size();
    has_cur_ = true;
    out_.next_events.push_back({x, true, y_low, 0, cur_.serial, 0});
  }

  void finalize_cur(std::int64_t x, bool emit_delete) {
    EMSKY_REQUIRE(!cur_.entries.empty(), "ppb: finalizing an empty node");
    Slot& s = out_.slots[cur_.serial];
    std::size_t elems = cur_.entries.size();
    Node node{cur_.x_create, x, cur_.y_low, cur_.succ, leaf_, std::move(cur_.entries)};
    if (cur_.self == 0) {
      BlockRef<Node> ref = st_->alloc<Node>(std::move(node), elems, false, "ppb node");
      cur_.self = ref.id();
      nodes_->emplace(cur_.self, std::move(ref));
    } else {
      st_->access_write(cur_.self, std::make_shared<const Node>(std::move(node)), elems);
    }
    s.id = cur_.self;
    s.x_copy = x;
    out_.sigma.push_back({s.x_create, x, s.y_low.y, s.y_low.id});
    if (emit_delete) out_.next_events.push_back({x, false, s.y_low, 0, cur_.serial, 0});
  }

  void version_copy(std::int64_t x) {
    std::vector<Entry> live;
    for (const Entry& e : cur_.entries)
      if (e.x_end == POS_INF) live.push_back({e.key, e.px, e.child, x, POS_INF});
    EMSKY_REQUIRE(!live.empty(), "ppb: version copy of a dead node");
    finalize_cur(x, true);
    has_cur_ = false;
    place(x, std::move(live));
  }

  void place(std::int64_t x, std::vector<Entry> live) {
    if (live.size() * 10 > 8 * B_) {
      split(x, std::move(live));
    } else if (live.size() * 4 < B_ && !above_.empty()) {
      merge(x, std::move(live));
    } else {
      start_cur(x, std::move(live), above_.empty() ? 0 : above_.front().id);
    }
  }

  // The upper half is frozen immediately; its insert event must precede the
  // lower half's so the level above sees keys arriving bottommost-last.
  void split(std::int64_t x, std::vector<Entry> live) {
    std::size_t nl = live.size() - live.size() / 2;
    std::vector<Entry> up(live.begin() + static_cast<std::ptrdiff_t>(nl), live.end());
    live.resize(nl);
    Key up_low = up.front().key;
    std::uint32_t us = new_slot(x, up_low);
    BlockId succ_up = above_.empty() ? 0 : above_.front().id;
    std::size_t elems = up.size();
    BlockRef<Node> ref =
        st_->alloc<Node>(Node{x, POS_INF, up_low, succ_up, leaf_, std::move(up)}, elems, false,
                         "ppb node");
    out_.slots[us].id = ref.id();
    out_.next_events.push_back({x, true, up_low, 0, us, 0});
    above_.push_front({ref.id(), us});
    nodes_->emplace(ref.id(), std::move(ref));
    start_cur(x, std::move(live), above_.front().id);
  }

  void merge(std::int64_t x, std::vector<Entry> live) {
    Above v = above_.front();
    above_.pop_front();
    const Node& vn = nodes_->at(v.id).fetch();
    for (const Entry& e : vn.entries) live.push_back({e.key, e.px, e.child, x, POS_INF});
    BlockId vsucc = vn.succ;
    std::size_t velems = vn.entries.size();
    Node upd = vn;
    upd.x_copy = x;
    st_->access_write(v.id, std::make_shared<const Node>(std::move(upd)), velems);
    Slot& vs = out_.slots[v.serial];
    vs.x_copy = x;
    out_.sigma.push_back({vs.x_create, x, vs.y_low.y, vs.y_low.id});
    out_.next_events.push_back({x, false, vs.y_low, 0, v.serial, 0});
    EMSKY_REQUIRE(vsucc == (above_.empty() ? 0 : above_.front().id),
                  "ppb: sibling successor mismatch");
    if (live.size() * 10 > 8 * B_) {
      split(x, std::move(live));
    } else {
      start_cur(x, std::move(live), vsucc);
    }
  }

  BlockStore* st_;
  std::size_t B_;
  bool leaf_;
  std::unordered_map<BlockId, BlockRef<Node>>* nodes_;
  bool has_cur_ = false;
  Cur cur_;
  std::deque<Above> above_;
  LevelOut out_;
};

}  // namespace

std::vector<Segment> compute_sigma(BlockStore& st, std::span<const Point> pts) {
  require_sorted(pts);
  std::vector<Segment> sigma;
  sweep(pts, sigma, nullptr);
  sort_sigma(sigma);
  // Stream model: read the points, spill and reload the sweep stack once,
  // write the segments out.
  const std::size_t B = st.block_capacity();
  st.charge_reads(stream_blocks(pts.size(), B));
  st.charge_writes(stream_blocks(pts.size(), B));
  st.charge_reads(stream_blocks(pts.size(), B));
  st.charge_writes(stream_blocks(sigma.size(), B));
  return sigma;
}

SigmaReport verify_sigma_properties(std::span<const Segment> segs) {
  auto fail = [](std::string w) { return SigmaReport{false, std::move(w)}; };
  for (const Segment& s : segs)
    if (s.x_lo > s.x_hi)
      return fail("segment with x_lo > x_hi: owner " + std::to_string(s.owner));
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Segment& a = segs[i];
    if (a.x_lo >= a.x_hi) continue;  // empty strips never conflict
    for (std::size_t j = i + 1; j < segs.size(); ++j) {
      const Segment& b = segs[j];
      if (b.x_lo >= b.x_hi) continue;
      if (std::max(a.x_lo, b.x_lo) >= std::min(a.x_hi, b.x_hi)) continue;
      bool a_in_b = b.x_lo <= a.x_lo && a.x_hi <= b.x_hi;
      bool b_in_a = a.x_lo <= b.x_lo && b.x_hi <= a.x_hi;
      if (!a_in_b && !b_in_a)
        return fail("segments do not nest: owners " + std::to_string(a.owner) + " and " +
                    std::to_string(b.owner));
    }
  }
  std::vector<std::int64_t> xs;
  for (const Segment& s : segs) {
    xs.push_back(s.x_lo);
    if (s.x_hi != POS_INF) xs.push_back(s.x_hi);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<const Segment*> alive;
  for (std::int64_t x : xs) {
    alive.clear();
    for (const Segment& s : segs)
      if (s.alive_at(x)) alive.push_back(&s);
    std::sort(alive.begin(), alive.end(), [](const Segment* a, const Segment* b) {
      if (a->y != b->y) return a->y < b->y;
      return a->owner < b->owner;
    });
    for (std::size_t i = 1; i < alive.size(); ++i) {
      const Segment* lo = alive[i - 1];
      const Segment* hi = alive[i];
      if (!(hi->x_lo <= lo->x_lo && lo->x_hi <= hi->x_hi))
        return fail("monotonicity violated at x=" + std::to_string(x) + ": owner " +
                    std::to_string(hi->owner) + " above " + std::to_string(lo->owner));
    }
  }
  return {};
}

StaticTopOpen StaticTopOpen::build(BlockStore& st, std::span<const Point> pts) {
  // Below 8 the underflow threshold floor(B/4) cannot sit strictly between 0
  // and the split threshold, and level counts may stop shrinking.
  const std::size_t B = st.block_capacity();
  if (B < 8) throw PreconditionError("static_topopen: block capacity must be at least 8");
  require_sorted(pts);

  StaticTopOpen out;
  out.st_ = &st;
  out.n_ = pts.size();
  if (pts.empty()) return out;

  std::vector<Segment> sigma0;
  std::vector<Ev> evs;
  sweep(pts, sigma0, &evs);
  sort_sigma(sigma0);
  st.charge_reads(stream_blocks(pts.size(), B));   // point stream
  st.charge_writes(stream_blocks(pts.size(), B));  // stack spill out
  st.charge_reads(stream_blocks(pts.size(), B));   // stack spill back
  st.charge_writes(stream_blocks(sigma0.size(), B));
  out.sigmas_.push_back(std::move(sigma0));

  bool leaf = true;
  for (;;) {
    st.charge_writes(stream_blocks(evs.size(), B));  // event stream emitted
    st.charge_reads(stream_blocks(evs.size(), B));   // and consumed here
    LevelBuilder lb(st, leaf, out.nodes_);
    for (const Ev& e : evs) {
      if (e.ins) {
        lb.insert(e.x, e.key, e.px, e.child);
      } else {
        lb.erase(e.x, e.key);
      }
    }
    LevelOut lo = lb.finish();
    EMSKY_REQUIRE(!lo.slots.empty(), "ppb: empty level");
    out.counts_.push_back(lo.slots.size());
    sort_sigma(lo.sigma);
    out.sigmas_.push_back(std::move(lo.sigma));
    // A level whose snapshots never span two alive nodes is the tree top:
    // further levels would just mirror its version chain one to one. The
    // version count itself is handled by the root index.
    if (lo.max_alive <= 1) {
      std::vector<ppb::RootSlot> roots;
      roots.reserve(lo.slots.size());
      for (const Slot& s : lo.slots) {
        EMSKY_REQUIRE(s.id != 0, "ppb: unwritten node at the top level");
        roots.push_back({s.x_create, s.id});
      }
      out.build_roots(st, std::move(roots));
      break;
    }
    EMSKY_REQUIRE(out.counts_.size() < 64, "ppb: too many levels");
    std::vector<Ev> up;
    up.reserve(lo.next_events.size());
    for (Ev e : lo.next_events) {
      if (e.ins) {
        e.child = lo.slots[e.serial].id;
        EMSKY_REQUIRE(e.child != 0, "ppb: unresolved child id");
      }
      up.push_back(e);
    }
    evs = std::move(up);
    leaf = false;
  }

  out.build_rm(st, pts);
  return out;
}

void StaticTopOpen::build_roots(BlockStore& st, std::vector<ppb::RootSlot> slots) {
  const std::size_t B = st.block_capacity();
  std::vector<std::pair<std::int64_t, BlockId>> level;
  for (std::size_t i = 0; i < slots.size(); i += B) {
    std::size_t e = std::min(slots.size(), i + B);
    ppb::RootIndexNode nd;
    nd.leaf = true;
    nd.slots.assign(slots.begin() + static_cast<std::ptrdiff_t>(i),
                    slots.begin() + static_cast<std::ptrdiff_t>(e));
    std::int64_t first = nd.slots.front().x_create;
    std::size_t elems = nd.slots.size();
    BlockRef<ppb::RootIndexNode> ref =
        st.alloc<ppb::RootIndexNode>(std::move(nd), elems, false, "ppb root index");
    level.emplace_back(first, ref.id());
    roots_.emplace(ref.id(), std::move(ref));
  }
  while (level.size() > 1) {
    std::vector<std::pair<std::int64_t, BlockId>> up;
    for (std::size_t i = 0; i < level.size(); i += B) {
      std::size_t e = std::min(level.size(), i + B);
      ppb::RootIndexNode nd;
      nd.leaf = false;
      nd.kids.assign(level.begin() + static_cast<std::ptrdiff_t>(i),
                     level.begin() + static_cast<std::ptrdiff_t>(e));
      std::int64_t first = nd.kids.front().first;
      std::size_t elems = nd.kids.size();
      BlockRef<ppb::RootIndexNode> ref =
          st.alloc<ppb::RootIndexNode>(std::move(nd), elems, false, "ppb root index");
      up.emplace_back(first, ref.id());
      roots_.emplace(ref.id(), std::move(ref));
    }
    level = std::move(up);
  }
  roots_root_ = level.front().second;
}

void StaticTopOpen::build_rm(BlockStore& st, std::span<const Point> pts) {
  const std::size_t B = st.block_capacity();
  std::vector<RmEntry> level;
  for (std::size_t i = 0; i < pts.size(); i += B) {
    std::size_t e = std::min(pts.size(), i + B);
    RmNode nd;
    nd.leaf = true;
    nd.pts.assign(pts.begin() + static_cast<std::ptrdiff_t>(i),
                  pts.begin() + static_cast<std::ptrdiff_t>(e));
    ppb::Key mk{nd.pts[0].y, nd.pts[0].id};
    for (const Point& p : nd.pts)
      if (ppb::cmp(mk, ppb::Key{p.y, p.id}) < 0) mk = {p.y, p.id};
    std::int64_t xlo = nd.pts.front().x;
    std::int64_t xhi = nd.pts.back().x;
    std::size_t elems = nd.pts.size();
    BlockRef<RmNode> ref = st.alloc<RmNode>(std::move(nd), elems, false, "rm node");
    level.push_back({xlo, xhi, mk, ref.id()});
    rm_.emplace(ref.id(), std::move(ref));
  }
  while (level.size() > 1) {
    std::vector<RmEntry> up;
    for (std::size_t i = 0; i < level.size(); i += B) {
      std::size_t e = std::min(level.size(), i + B);
      RmNode nd;
      nd.leaf = false;
      nd.entries.assign(level.begin() + static_cast<std::ptrdiff_t>(i),
                        level.begin() + static_cast<std::ptrdiff_t>(e));
      ppb::Key mk = nd.entries[0].max_key;
      for (const RmEntry& en : nd.entries)
        if (ppb::cmp(mk, en.max_key) < 0) mk = en.max_key;
      std::int64_t xlo = nd.entries.front().x_lo;
      std::int64_t xhi = nd.entries.back().x_hi;
      std::size_t elems = nd.entries.size();
      BlockRef<RmNode> ref = st.alloc<RmNode>(std::move(nd), elems, false, "rm node");
      up.push_back({xlo, xhi, mk, ref.id()});
      rm_.emplace(ref.id(), std::move(ref));
    }
    level = std::move(up);
  }
  rm_root_ = level.front().child;
}

bool StaticTopOpen::rm_max(const RmNode& nd, std::int64_t a1, std::int64_t a2,
                           ppb::Key& best) const {
  bool found = false;
  if (nd.leaf) {
    for (const Point& p : nd.pts) {
      if (p.x < a1 || a2 < p.x) continue;
      ppb::Key k{p.y, p.id};
      if (!found || ppb::cmp(best, k) < 0) {
        best = k;
        found = true;
      }
    }
    return found;
  }
  for (const RmEntry& e : nd.entries) {
    if (e.x_hi < a1 || a2 < e.x_lo) continue;
    if (a1 <= e.x_lo && e.x_hi <= a2) {
      if (!found || ppb::cmp(best, e.max_key) < 0) {
        best = e.max_key;
        found = true;
      }
    } else {
      ppb::Key sub;
      if (rm_max(rm_.at(e.child).fetch(), a1, a2, sub) && (!found || ppb::cmp(best, sub) < 0)) {
        best = sub;
        found = true;
      }
    }
  }
  return found;
}

bool StaticTopOpen::rm_max_key(std::int64_t a1, std::int64_t a2, ppb::Key& best) const {
  if (n_ == 0) return false;
  return rm_max(rm_.at(rm_root_).fetch(), a1, a2, best);
}

std::int64_t StaticTopOpen::range_max_y(std::int64_t a1, std::int64_t a2) const {
  if (a1 > a2) throw PreconditionError("range_max_y: a1 > a2");
  ppb::Key k;
  return rm_max_key(a1, a2, k) ? k.y : NEG_INF;
}

const ppb::Node* StaticTopOpen::root_at(std::int64_t x, bool counted) const {
  const ppb::RootIndexNode* ri = nullptr;
  BlockId at = roots_root_;
  for (;;) {
    const BlockRef<ppb::RootIndexNode>& ref = roots_.at(at);
    ri = counted ? &ref.fetch() : &ref.peek();
    if (ri->leaf) break;
    auto it = std::upper_bound(
        ri->kids.begin(), ri->kids.end(), x,
        [](std::int64_t v, const std::pair<std::int64_t, BlockId>& k) { return v < k.first; });
    if (it == ri->kids.begin()) return nullptr;  // before the first snapshot
    at = std::prev(it)->second;
  }
  auto it = std::upper_bound(ri->slots.begin(), ri->slots.end(), x,
                             [](std::int64_t v, const ppb::RootSlot& s) { return v < s.x_create; });
  if (it == ri->slots.begin()) return nullptr;
  BlockId id = std::prev(it)->id;
  const ppb::Node& nd = counted ? fetch_node(id) : peek_node(id);
  if (!(nd.x_create <= x && x < nd.x_copy)) return nullptr;  // gap: empty snapshot
  return &nd;
}

SkylineAnswer StaticTopOpen::query(std::int64_t a1, std::int64_t a2, std::int64_t beta) const {
  if (a1 > a2) throw PreconditionError("query: a1 > a2");
  if (n_ == 0) return {};
  ppb::Key cap;
  if (!rm_max_key(a1, a2, cap) || cap.y < beta) return {};
  const ppb::Node* nd = root_at(a2, true);
  if (nd == nullptr) return {};
  while (!nd->leaf) {
    const Entry* pick = nullptr;
    const Entry* first_alive = nullptr;
    for (const Entry& e : nd->entries) {
      if (!(e.x_start <= a2 && a2 < e.x_end)) continue;
      if (first_alive == nullptr) first_alive = &e;
      if (e.key.y < beta) pick = &e;
    }
    if (pick == nullptr) pick = first_alive;
    EMSKY_REQUIRE(pick != nullptr, "ppb: descent through an empty snapshot node");
    nd = &fetch_node(pick->child);
  }
  // Climb the successor chain from the anchor leaf, collecting alive entries
  // with beta <= y and key at most the range maximum (tie-broken).
  SkylineAnswer ans;
  std::size_t guard = nodes_.size() + 2;
  for (;;) {
    EMSKY_REQUIRE(guard-- > 0, "ppb: leaf walk guard");
    EMSKY_REQUIRE(nd->x_create <= a2 && a2 < nd->x_copy, "ppb: dead node in the leaf walk");
    bool done = false;
    for (const Entry& e : nd->entries) {
      if (!(e.x_start <= a2 && a2 < e.x_end)) continue;
      if (e.key.y < beta) continue;
      if (ppb::cmp(e.key, cap) > 0) {
        done = true;
        break;
      }
      ans.push_back({e.px, e.key.y, e.key.id});
    }
    if (done || nd->succ == 0) break;
    nd = &fetch_node(nd->succ);
  }
  EMSKY_REQUIRE(!ans.empty(), "ppb: empty answer despite a range maximum");
  std::reverse(ans.begin(), ans.end());
  return ans;
}

std::vector<Point> StaticTopOpen::snapshot_leaves(std::int64_t x) const {
  std::vector<Point> out;
  if (n_ == 0) return out;
  const ppb::Node* nd = root_at(x, false);
  if (nd == nullptr) return out;
  while (!nd->leaf) {
    const Entry* first = nullptr;
    for (const Entry& e : nd->entries) {
      if (e.x_start <= x && x < e.x_end) {
        first = &e;
        break;
      }
    }
    if (first == nullptr) return out;
    nd = &peek_node(first->child);
  }
  for (;;) {
    for (const Entry& e : nd->entries)
      if (e.x_start <= x && x < e.x_end) out.push_back({e.px, e.key.y, e.key.id});
    if (nd->succ == 0) break;
    nd = &peek_node(nd->succ);
  }
  return out;
}

}  // namespace emsky
