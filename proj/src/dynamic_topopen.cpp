#include "emsky/dynamic_topopen.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace emsky {

namespace {

// Even partition of total into chunks of at most hi; with two or more chunks
// every size is at least hi/2 (hi is always even here).
std::vector<std::size_t> chunk_sizes(std::size_t total, std::size_t hi) {
  std::vector<std::size_t> out;
  if (total == 0) return out;
  const std::size_t parts = (total + hi - 1) / hi;
  const std::size_t base = total / parts;
  const std::size_t extra = total % parts;
  for (std::size_t i = 0; i < parts; ++i) out.push_back(base + (i < extra ? 1 : 0));
  return out;
}

void require_sorted(std::span<const Point> pts) {
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (cmp_x(pts[i - 1], pts[i]) >= 0)
      throw PreconditionError("dyn_topopen: points not strictly sorted by x");
}

}  // namespace

Elem mirror_elem(const Point& p) { return Elem{-p.y, p.id, p.x}; }

std::vector<Elem> mirrored_staircase(std::span<const Point> pts) {
  std::vector<Elem> out;
  Elem best{};
  bool have = false;
  for (std::size_t i = pts.size(); i-- > 0;) {
    Elem e = mirror_elem(pts[i]);
    if (!have || elem_less(e, best)) {
      out.push_back(e);
      best = e;
      have = true;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

DynTopOpen::~DynTopOpen() { release_root_pins(); }

DynTopOpen& DynTopOpen::operator=(DynTopOpen&& o) noexcept {
  if (this != &o) {
    release_root_pins();
    st_ = o.st_;
    eps_ = o.eps_;
    a_ = o.a_;
    b_ = o.b_;
    n_ = o.n_;
    root_ = std::move(o.root_);
    root_pins_ = std::move(o.root_pins_);
  }
  return *this;
}

void DynTopOpen::release_root_pins() {
  if (!st_) return;
  for (BlockId id : root_pins_)
    if (st_->is_live(id) && st_->is_pinned(id)) st_->unpin(id);
  root_pins_.clear();
}

void DynTopOpen::resync_root_pins() {
  std::vector<BlockId> want = root_->q->critical_blocks();
  for (BlockId id : root_pins_) {
    if (std::find(want.begin(), want.end(), id) != want.end()) continue;
    if (st_->is_live(id) && st_->is_pinned(id)) st_->unpin(id);
  }
  for (BlockId id : want)
    if (!st_->is_pinned(id)) st_->pin(id, "dyn-root");
  root_pins_ = std::move(want);
}

void DynTopOpen::rebuild_leaf(Node& u) const {
  u.leaf = true;
  u.blk = st_->alloc<std::vector<Point>>(u.pts, u.pts.size(), false, "dyn-leaf");
  u.q = Cpqa::normalize_for_catenation(Cpqa::from_sorted(*st_, b_, mirrored_staircase(u.pts)));
  if (!u.pts.empty()) {
    u.lo = u.pts.front();
    u.hi = u.pts.back();
  } else {
    u.lo = u.hi = Point{};
  }
}

// Recomputes an internal node from its children's current queues: the rep
// block read (when one exists) is what entitles us to treat the children's
// critical records as resident for the catenation.
void DynTopOpen::rebuild_internal(Node& u, bool charge_rep_fetch) const {
  EMSKY_REQUIRE(!u.kids.empty(), "dyn_topopen: internal node with no children");
  u.leaf = false;
  if (charge_rep_fetch && u.rep) (void)u.rep.fetch();
  std::vector<BlockId> mine;
  std::vector<CpqaPtr> qs;
  for (const auto& kid : u.kids) {
    qs.push_back(kid->q);
    for (BlockId id : kid->q->critical_blocks())
      if (!st_->is_pinned(id)) {
        st_->pin_resident(id, "dyn-rep");
        mine.push_back(id);
      }
  }
  u.q = Cpqa::normalize_for_catenation(Cpqa::multi_catenate(*st_, b_, qs));
  RepPayload rp;
  std::size_t elems = 0;
  for (const auto& kid : u.kids) {
    RepChild rc;
    for (BlockId id : kid->q->critical_blocks()) {
      auto p = std::static_pointer_cast<const std::vector<Elem>>(st_->access_read(id));
      elems += p->size();
      rc.recs.push_back({id, *p});
    }
    rp.push_back(std::move(rc));
  }
  u.rep = st_->alloc<RepPayload>(std::move(rp), elems, false, "dyn-rep");
  for (BlockId id : mine) st_->unpin(id);
  u.lo = u.kids.front()->lo;
  u.hi = u.kids.back()->hi;
}

DynTopOpen DynTopOpen::build_sorted(BlockStore& st, std::span<const Point> pts, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw PreconditionError("dyn_topopen: eps must lie in [0, 1]");
  require_sorted(pts);
  const std::size_t B = st.block_capacity();
  DynTopOpen t;
  t.st_ = &st;
  t.eps_ = eps;
  t.a_ = std::max<std::size_t>(2, static_cast<std::size_t>(
                                      std::ceil(2.0 * std::pow(static_cast<double>(B), eps))));
  const double braw = std::pow(static_cast<double>(B), 1.0 - eps);
  t.b_ = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(braw)), 1, B);
  t.n_ = pts.size();
  if (!pts.empty()) st.charge_reads((pts.size() + B - 1) / B);  // input scan

  std::vector<std::unique_ptr<Node>> level;
  if (pts.empty()) {
    auto leaf = std::make_unique<Node>();
    t.rebuild_leaf(*leaf);
    level.push_back(std::move(leaf));
  } else {
    std::size_t at = 0;
    for (std::size_t sz : chunk_sizes(pts.size(), 2 * B)) {
      auto leaf = std::make_unique<Node>();
      leaf->pts.assign(pts.begin() + static_cast<std::ptrdiff_t>(at),
                       pts.begin() + static_cast<std::ptrdiff_t>(at + sz));
      at += sz;
      t.rebuild_leaf(*leaf);
      level.push_back(std::move(leaf));
    }
  }
  while (level.size() > 1) {
    std::vector<std::unique_ptr<Node>> up;
    std::size_t at = 0;
    for (std::size_t sz : chunk_sizes(level.size(), 2 * t.a_)) {
      auto node = std::make_unique<Node>();
      for (std::size_t i = 0; i < sz; ++i) node->kids.push_back(std::move(level[at + i]));
      at += sz;
      t.rebuild_internal(*node, false);
      up.push_back(std::move(node));
    }
    level = std::move(up);
  }
  t.root_ = std::move(level.front());
  t.resync_root_pins();
  return t;
}

std::size_t DynTopOpen::height() const {
  std::size_t h = 1;
  for (const Node* u = root_.get(); !u->leaf; u = u->kids.front().get()) ++h;
  return h;
}

CpqaPtr DynTopOpen::fold_children(const Node& u, std::size_t from, std::size_t to) const {
  if (from >= to) return nullptr;
  std::vector<BlockId> mine;
  std::vector<CpqaPtr> qs;
  for (std::size_t i = from; i < to; ++i) {
    qs.push_back(u.kids[i]->q);
    for (BlockId id : u.kids[i]->q->critical_blocks())
      if (!st_->is_pinned(id)) {
        st_->pin_resident(id, "dyn-fold");
        mine.push_back(id);
      }
  }
  CpqaPtr t = Cpqa::normalize_for_catenation(Cpqa::multi_catenate(*st_, b_, qs));
  for (BlockId id : mine) st_->unpin(id);
  return t;
}

CpqaPtr DynTopOpen::leaf_range_queue(const Node& u, std::int64_t a1, std::int64_t a2) const {
  std::vector<Point> in;
  for (const Point& p : u.pts)
    if (p.x >= a1 && p.x <= a2) in.push_back(p);
  if (in.empty()) return nullptr;
  return Cpqa::normalize_for_catenation(Cpqa::from_sorted(*st_, b_, mirrored_staircase(in)));
}

SkylineAnswer DynTopOpen::query(std::int64_t a1, std::int64_t a2, std::int64_t beta) const {
  if (a1 > a2) throw PreconditionError("dyn_topopen: query range is inverted");
  SkylineAnswer out;
  if (n_ == 0) return out;
  const Node* r = root_.get();
  if (r->hi.x < a1 || r->lo.x > a2) return out;

  // Boundary paths toward the successor of a1 and the predecessor of a2.
  std::vector<const Node*> n1, n2;
  std::vector<std::size_t> i1, i2;
  const Node* u = r;
  while (!u->leaf) {
    std::size_t j = 0;
    while (u->kids[j]->hi.x < a1) ++j;
    n1.push_back(u);
    i1.push_back(j);
    u = u->kids[j].get();
  }
  const Node* l1 = u;
  u = r;
  while (!u->leaf) {
    std::size_t j = u->kids.size() - 1;
    while (u->kids[j]->lo.x > a2) --j;
    n2.push_back(u);
    i2.push_back(j);
    u = u->kids[j].get();
  }
  const Node* l2 = u;

  // The successor must actually fall inside [a1, a2].
  {
    const Point* s = nullptr;
    for (const Point& p : l1->pts)
      if (p.x >= a1) {
        s = &p;
        break;
      }
    EMSKY_REQUIRE(s, "dyn_topopen: successor leaf lost the successor");
    if (s->x > a2) return out;
  }

  // Descent cost: one block per internal node visited, shared prefix once.
  for (std::size_t d = 0; d < n1.size(); ++d) {
    (void)n1[d]->rep.fetch();
    if (n2[d] != n1[d]) (void)n2[d]->rep.fetch();
  }
  (void)l1->blk.fetch();
  if (l2 != l1) (void)l2->blk.fetch();

  std::vector<CpqaPtr> parts;
  auto push = [&parts](CpqaPtr q) {
    if (q && !q->empty()) parts.push_back(std::move(q));
  };
  if (l1 == l2) {
    push(leaf_range_queue(*l1, a1, a2));
  } else {
    std::size_t d0 = 0;
    while (d0 < i1.size() && i1[d0] == i2[d0]) ++d0;
    EMSKY_REQUIRE(d0 < i1.size() && i1[d0] < i2[d0], "dyn_topopen: boundary paths out of order");
    push(leaf_range_queue(*l1, a1, a2));
    for (std::size_t d = n1.size(); d-- > d0 + 1;)
      push(fold_children(*n1[d], i1[d] + 1, n1[d]->kids.size()));
    push(fold_children(*n1[d0], i1[d0] + 1, i2[d0]));
    for (std::size_t d = d0 + 1; d < n2.size(); ++d) push(fold_children(*n2[d], 0, i2[d]));
    push(leaf_range_queue(*l2, a1, a2));
  }
  if (parts.empty()) return out;

  CpqaPtr aux = Cpqa::multi_catenate(*st_, b_, parts);
  CpqaHandle h(*st_, b_);
  h.replace(std::move(aux));
  while (!h.empty()) {
    Elem e = h.delete_min();
    const std::int64_t y = -e.key;
    if (y < beta) break;
    out.push_back({e.aux, y, e.id});
  }
  return out;
}

void DynTopOpen::insert(const Point& p) {
  const std::size_t cap = st_->block_capacity();
  std::vector<std::pair<Node*, std::size_t>> path;
  Node* u = root_.get();
  while (!u->leaf) {
    std::size_t j = 0;
    while (j + 1 < u->kids.size() && cmp_x(p, u->kids[j]->hi) > 0) ++j;
    path.push_back({u, j});
    u = u->kids[j].get();
  }
  (void)u->blk.fetch();
  auto pos = std::lower_bound(u->pts.begin(), u->pts.end(), p, less_x);
  if (pos != u->pts.end() && cmp_x(*pos, p) == 0)
    throw PreconditionError("dyn_topopen: insert of a present point");
  u->pts.insert(pos, p);
  ++n_;

  std::unique_ptr<Node> carry;  // right sibling spawned by the level below
  if (u->pts.size() > 2 * cap) {
    carry = std::make_unique<Node>();
    const std::size_t half = u->pts.size() / 2;
    carry->pts.assign(u->pts.begin() + static_cast<std::ptrdiff_t>(half), u->pts.end());
    u->pts.resize(half);
    rebuild_leaf(*u);
    rebuild_leaf(*carry);
  } else {
    rebuild_leaf(*u);
  }
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    Node* v = it->first;
    const std::size_t j = it->second;
    if (carry)
      v->kids.insert(v->kids.begin() + static_cast<std::ptrdiff_t>(j) + 1, std::move(carry));
    if (v->kids.size() > 2 * a_) {
      carry = std::make_unique<Node>();
      const std::size_t half = v->kids.size() / 2;
      for (std::size_t i = half; i < v->kids.size(); ++i)
        carry->kids.push_back(std::move(v->kids[i]));
      v->kids.resize(half);
      rebuild_internal(*v, true);
      rebuild_internal(*carry, false);
    } else {
      rebuild_internal(*v, true);
    }
  }
  if (carry) {
    auto nr = std::make_unique<Node>();
    nr->kids.push_back(std::move(root_));
    nr->kids.push_back(std::move(carry));
    rebuild_internal(*nr, false);
    root_ = std::move(nr);
  }
  resync_root_pins();
}

void DynTopOpen::erase(const Point& p) {
  const std::size_t cap = st_->block_capacity();
  std::vector<std::pair<Node*, std::size_t>> path;
  Node* u = root_.get();
  while (!u->leaf) {
    std::size_t j = 0;
    while (j < u->kids.size() && cmp_x(p, u->kids[j]->hi) > 0) ++j;
    if (j == u->kids.size()) throw PreconditionError("dyn_topopen: erase of a missing point");
    path.push_back({u, j});
    u = u->kids[j].get();
  }
  (void)u->blk.fetch();
  auto pos = std::lower_bound(u->pts.begin(), u->pts.end(), p, less_x);
  if (pos == u->pts.end() || cmp_x(*pos, p) != 0 || !(*pos == p))
    throw PreconditionError("dyn_topopen: erase of a missing point");
  u->pts.erase(pos);
  --n_;

  if (path.empty()) {
    rebuild_leaf(*u);
    resync_root_pins();
    return;
  }
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    Node* v = it->first;
    std::size_t j = it->second;
    Node* c = v->kids[j].get();
    const bool deficient = c->leaf ? c->pts.size() < cap : c->kids.size() < a_;
    if (!deficient) {
      if (c->leaf)
        rebuild_leaf(*c);
      else
        rebuild_internal(*c, true);
      continue;
    }
    const std::size_t sj = j > 0 ? j - 1 : j + 1;
    const std::size_t L = std::min(j, sj), R = std::max(j, sj);
    Node* ln = v->kids[L].get();
    Node* rn = v->kids[R].get();
    if (c->leaf) {
      (void)v->kids[sj]->blk.fetch();
      std::vector<Point> all = std::move(ln->pts);
      all.insert(all.end(), rn->pts.begin(), rn->pts.end());
      if (all.size() > 2 * cap) {
        const std::size_t half = all.size() / 2;
        ln->pts.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(half));
        rn->pts.assign(all.begin() + static_cast<std::ptrdiff_t>(half), all.end());
        rebuild_leaf(*ln);
        rebuild_leaf(*rn);
      } else {
        ln->pts = std::move(all);
        rebuild_leaf(*ln);
        v->kids.erase(v->kids.begin() + static_cast<std::ptrdiff_t>(R));
      }
    } else {
      const std::size_t total = ln->kids.size() + rn->kids.size();
      if (total > 2 * a_) {
        const std::size_t half = total / 2;
        if (ln->kids.size() < half) {
          while (ln->kids.size() < half) {
            ln->kids.push_back(std::move(rn->kids.front()));
            rn->kids.erase(rn->kids.begin());
          }
        } else {
          while (ln->kids.size() > half) {
            rn->kids.insert(rn->kids.begin(), std::move(ln->kids.back()));
            ln->kids.pop_back();
          }
        }
        rebuild_internal(*ln, true);
        rebuild_internal(*rn, true);
      } else {
        for (auto& k : rn->kids) ln->kids.push_back(std::move(k));
        rebuild_internal(*ln, true);
        v->kids.erase(v->kids.begin() + static_cast<std::ptrdiff_t>(R));
      }
    }
  }
  while (!root_->leaf && root_->kids.size() == 1) {
    std::unique_ptr<Node> only = std::move(root_->kids.front());
    root_ = std::move(only);
  }
  if (!root_->leaf) rebuild_internal(*root_, true);
  resync_root_pins();
}

std::vector<DynTopOpen::NodeProbe> DynTopOpen::probe_nodes() const {
  std::vector<NodeProbe> out;
  struct Item {
    const Node* u;
    std::size_t depth;
  };
  std::vector<Item> stack{{root_.get(), 0}};
  auto gather = [](const Node* u, auto&& self, std::vector<Point>& into) -> void {
    if (u->leaf) {
      into.insert(into.end(), u->pts.begin(), u->pts.end());
      return;
    }
    for (const auto& k : u->kids) self(k.get(), self, into);
  };
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    NodeProbe pr;
    pr.q = it.u->q;
    pr.kids = it.u->leaf ? 0 : it.u->kids.size();
    pr.depth = it.depth;
    gather(it.u, gather, pr.pts);
    out.push_back(std::move(pr));
    if (!it.u->leaf)
      for (auto k = it.u->kids.rbegin(); k != it.u->kids.rend(); ++k)
        stack.push_back({k->get(), it.depth + 1});
  }
  return out;
}

CpqaPtr DynTopOpen::root_queue() const { return root_->q; }

InvariantReport DynTopOpen::check_structure() const {
  std::string fail;
  const std::size_t cap = st_->block_capacity();
  std::size_t leaf_depth = 0;
  bool have_depth = false;
  std::size_t total = 0;

  auto bad = [&fail](const std::string& what) {
    if (fail.empty()) fail = what;
    return false;
  };
  auto walk = [&](const Node* u, std::size_t depth, bool is_root, auto&& self) -> bool {
    if (!u->q) return bad("node without a queue");
    if (u->q->buffer_param() != b_) return bad("node queue with wrong b");
    if (u->leaf) {
      if (!have_depth) {
        leaf_depth = depth;
        have_depth = true;
      } else if (depth != leaf_depth) {
        return bad("leaves at unequal depths");
      }
      if (!is_root && (u->pts.size() < cap || u->pts.size() > 2 * cap))
        return bad("leaf size out of range");
      if (is_root && u->pts.size() > 2 * cap) return bad("root leaf too large");
      for (std::size_t i = 1; i < u->pts.size(); ++i)
        if (cmp_x(u->pts[i - 1], u->pts[i]) >= 0) return bad("leaf points unsorted");
      if (!u->blk || u->blk.elems() != u->pts.size() || !(u->blk.peek() == u->pts))
        return bad("leaf payload does not match its points");
      if (!u->pts.empty() &&
          (!(u->lo == u->pts.front()) || !(u->hi == u->pts.back())))
        return bad("leaf routing keys stale");
      total += u->pts.size();
      return true;
    }
    if (u->kids.size() > 2 * a_ || u->kids.size() < (is_root ? 2 : a_))
      return bad("internal fan out of range");
    for (std::size_t i = 1; i < u->kids.size(); ++i)
      if (cmp_x(u->kids[i - 1]->hi, u->kids[i]->lo) >= 0) return bad("children out of order");
    if (!(u->lo == u->kids.front()->lo) || !(u->hi == u->kids.back()->hi))
      return bad("internal routing keys stale");
    if (!u->rep) return bad("internal node without a representative block");
    const RepPayload& rp = u->rep.peek();
    if (rp.size() != u->kids.size()) return bad("representative block child count mismatch");
    for (std::size_t i = 0; i < u->kids.size(); ++i) {
      std::vector<BlockId> ids = u->kids[i]->q->critical_blocks();
      if (ids.size() != rp[i].recs.size())
        return bad("representative block record count mismatch");
      for (std::size_t r = 0; r < ids.size(); ++r) {
        if (rp[i].recs[r].id != ids[r]) return bad("representative block id mismatch");
        auto pl = std::static_pointer_cast<const std::vector<Elem>>(
            st_->state().need(ids[r])->payload);
        const auto& want = rp[i].recs[r].elems;
        if (pl->size() != want.size()) return bad("representative block content mismatch");
        for (std::size_t e = 0; e < want.size(); ++e)
          if (!elem_eq((*pl)[e], want[e]) || (*pl)[e].aux != want[e].aux)
            return bad("representative block content mismatch");
      }
    }
    for (const auto& k : u->kids)
      if (!self(k.get(), depth + 1, false, self)) return false;
    return true;
  };
  if (!walk(root_.get(), 0, true, walk)) return {false, fail};
  if (total != n_) return {false, "size bookkeeping off"};
  for (BlockId id : root_->q->critical_blocks())
    if (!st_->is_pinned(id)) return {false, "root critical record not pinned"};
  return {true, ""};
}

}  // namespace emsky
