#include "emsky/foursided.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
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

void require_input(std::span<const Point> pts) {
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (cmp_x(pts[i - 1], pts[i]) >= 0)
      throw PreconditionError("foursided: points not strictly sorted by x");
  std::vector<Point> by_y(pts.begin(), pts.end());
  std::sort(by_y.begin(), by_y.end(), less_y);
  for (std::size_t i = 1; i < by_y.size(); ++i)
    if (cmp_y(by_y[i - 1], by_y[i]) == 0)
      throw PreconditionError("foursided: points must have distinct (y, id) pairs");
}

// Fan of the base tree: (n/B)^eps / ln(n/B), floored so the height stays
// at most ceil(1/eps) + 3 even where the main term degenerates.
std::size_t pick_fan(std::size_t n, std::size_t B, double eps) {
  const double ratio = std::max(1.0, static_cast<double>(n) / static_cast<double>(B));
  long long f = 2;
  if (std::log(ratio) > 1.0)
    f = std::max(f, std::llround(std::pow(ratio, eps) / std::log(ratio)));
  const double levels = std::ceil(1.0 / eps) + 2.0;
  f = std::max(f, static_cast<long long>(std::ceil(std::pow(ratio, 1.0 / levels))));
  return static_cast<std::size_t>(f);
}

// Maxima of the points inside rect that additionally beat floor under
// cmp_y, ascending by x. Dropping the floored points is safe: any
// dominator of a survivor beats the floor itself.
SkylineAnswer scan_maxima(std::span<const Point> pts, const QueryRect& rect,
                          const std::optional<Point>& floor) {
  std::vector<Point> in;
  for (const Point& p : pts)
    if (rect.contains(p) && (!floor || cmp_y(p, *floor) > 0)) in.push_back(p);
  return skyline_oracle(in, rect);
}

}  // namespace

FourSided FourSided::build_sorted(BlockStore& st, std::span<const Point> pts, double eps) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw PreconditionError("foursided: eps must lie in (0, 1]");
  require_input(pts);
  FourSided t;
  t.st_ = &st;
  t.eps_ = eps;
  t.init_from(pts);
  return t;
}

void FourSided::init_from(std::span<const Point> pts) {
  const std::size_t B = st_->block_capacity();
  n_ = n0_ = pts.size();
  updates_ = 0;
  f_ = pick_fan(n_, B, eps_);
  root_.reset();

  // Contiguous slice per node lets every R build reuse the input directly.
  struct Part {
    std::unique_ptr<Node> node;
    std::size_t from, to;
  };
  std::vector<Part> level;
  if (pts.empty()) {
    level.push_back({make_leaf({}), 0, 0});
  } else {
    std::size_t at = 0;
    for (std::size_t sz : chunk_sizes(pts.size(), 2 * B)) {
      level.push_back({make_leaf(pts.subspan(at, sz)), at, at + sz});
      at += sz;
    }
  }
  while (level.size() > 1) {
    std::vector<Part> up;
    std::size_t at = 0;
    for (std::size_t sz : chunk_sizes(level.size(), 2 * f_)) {
      auto node = std::make_unique<Node>();
      node->leaf = false;
      for (std::size_t i = 0; i < sz; ++i) node->kids.push_back(std::move(level[at + i].node));
      const std::size_t from = level[at].from, to = level[at + sz - 1].to;
      at += sz;
      refresh_keys(*node);
      up.push_back({std::move(node), from, to});
    }
    level = std::move(up);
    if (level.size() > 1)  // everyone at this level ends up below the root
      for (Part& part : level)
        build_r(*part.node, pts.subspan(part.from, part.to - part.from));
  }
  root_ = std::move(level.front().node);
}

std::unique_ptr<FourSided::Node> FourSided::make_leaf(std::span<const Point> pts) const {
  auto leaf = std::make_unique<Node>();
  leaf->pts.assign(pts.begin(), pts.end());
  refresh_leaf(*leaf);
  return leaf;
}

void FourSided::refresh_leaf(Node& u) const {
  u.leaf = true;
  u.blk = st_->alloc<std::vector<Point>>(u.pts, u.pts.size(), false, "4s-leaf");
  if (!u.pts.empty()) {
    u.lo = u.pts.front();
    u.hi = u.pts.back();
  } else {
    u.lo = u.hi = Point{};
  }
}

void FourSided::refresh_keys(Node& u) const {
  EMSKY_REQUIRE(!u.kids.empty(), "foursided: internal node with no children");
  std::vector<Point> bounds;
  for (const auto& kid : u.kids) {
    bounds.push_back(kid->lo);
    bounds.push_back(kid->hi);
  }
  u.keys = st_->alloc<std::vector<Point>>(std::move(bounds), 2 * u.kids.size(), false, "4s-keys");
  u.lo = u.kids.front()->lo;
  u.hi = u.kids.back()->hi;
}

void FourSided::build_r(Node& u, std::span<const Point> subtree) const {
  std::vector<Point> sw = swap_axes(subtree);
  std::sort(sw.begin(), sw.end(), less_x);
  u.r = std::make_unique<DynTopOpen>(DynTopOpen::build_sorted(*st_, sw, 0.0));
}

void FourSided::rebuild_r(Node& u) const {
  std::vector<Point> sub;
  gather_points(u, true, sub);
  build_r(u, sub);
}

void FourSided::gather_points(const Node& u, bool charge, std::vector<Point>& out) const {
  if (u.leaf) {
    if (charge) (void)u.blk.fetch();
    out.insert(out.end(), u.pts.begin(), u.pts.end());
    return;
  }
  for (const auto& kid : u.kids) gather_points(*kid, charge, out);
}

std::size_t FourSided::height() const {
  std::size_t h = 1;
  for (const Node* u = root_.get(); !u->leaf; u = u->kids.front().get()) ++h;
  return h;
}

SkylineAnswer FourSided::query(std::int64_t x_lo, std::int64_t x_hi, std::int64_t y_lo,
                               std::int64_t y_hi) const {
  if (x_lo > x_hi || y_lo > y_hi) throw PreconditionError("foursided: query range is inverted");
  const QueryRect rect{QueryKind::FourSided, x_lo, x_hi, y_lo, y_hi};
  SkylineAnswer out;
  if (n_ == 0) return out;
  const Node* r = root_.get();
  if (r->hi.x < x_lo || r->lo.x > x_hi) return out;

  // Boundary paths toward the successor of x_lo and the predecessor of x_hi.
  std::vector<const Node*> n1, n2;
  std::vector<std::size_t> i1, i2;
  const Node* u = r;
  while (!u->leaf) {
    std::size_t j = 0;
    while (u->kids[j]->hi.x < x_lo) ++j;
    n1.push_back(u);
    i1.push_back(j);
    u = u->kids[j].get();
  }
  const Node* l1 = u;
  u = r;
  while (!u->leaf) {
    std::size_t j = u->kids.size() - 1;
    while (u->kids[j]->lo.x > x_hi) --j;
    n2.push_back(u);
    i2.push_back(j);
    u = u->kids[j].get();
  }
  const Node* l2 = u;
  for (std::size_t d = 0; d < n1.size(); ++d) {
    (void)n1[d]->keys.fetch();
    if (n2[d] != n1[d]) (void)n2[d]->keys.fetch();
  }

  (void)l1->blk.fetch();
  {
    const Point* s = nullptr;
    for (const Point& p : l1->pts)
      if (p.x >= x_lo) {
        s = &p;
        break;
      }
    EMSKY_REQUIRE(s, "foursided: successor leaf lost the successor");
    if (s->x > x_hi) return out;
  }
  if (l1 == l2) return scan_maxima(l1->pts, rect, std::nullopt);
  (void)l2->blk.fetch();

  // Right-to-left sweep. floor is the highest point reported so far; only
  // points beating it under cmp_y can still be on the skyline, since
  // everything already swept lies strictly to their right.
  std::optional<Point> floor;
  SkylineAnswer rev;  // collected in descending x
  auto emit = [&rev](const SkylineAnswer& asc) {
    rev.insert(rev.end(), asc.rbegin(), asc.rend());
  };
  auto raise = [&floor](const Point& p) {
    if (!floor || cmp_y(*floor, p) < 0) floor = p;
  };
  auto sweep_leaf = [&](const Node* v) {
    emit(scan_maxima(v->pts, rect, floor));
    for (const Point& p : v->pts)
      if (rect.contains(p)) raise(p);
  };
  auto sweep = [&](const Node* v) {
    if (v->leaf) {
      (void)v->blk.fetch();
      sweep_leaf(v);
      return;
    }
    // Band query on the swapped substructure: x there is y here. The floor
    // value re-enters the band, so stale y-ties are filtered exactly.
    SkylineAnswer got = v->r->query(floor ? floor->y : y_lo, y_hi, NEG_INF);
    for (const Point& q : got) {
      const Point p = swap_axes(q);
      if (!floor || cmp_y(p, *floor) > 0) rev.push_back(p);
    }
    if (!got.empty()) raise(swap_axes(got.back()));
  };

  sweep_leaf(l2);
  std::size_t d0 = 0;
  while (d0 < i1.size() && i1[d0] == i2[d0]) ++d0;
  EMSKY_REQUIRE(d0 < i1.size() && i1[d0] < i2[d0], "foursided: boundary paths out of order");
  for (std::size_t d = n2.size(); d-- > d0 + 1;)
    for (std::size_t j = i2[d]; j-- > 0;) sweep(n2[d]->kids[j].get());
  for (std::size_t j = i2[d0]; j-- > i1[d0] + 1;) sweep(n1[d0]->kids[j].get());
  for (std::size_t d = d0 + 1; d < n1.size(); ++d)
    for (std::size_t j = n1[d]->kids.size(); j-- > i1[d] + 1;) sweep(n1[d]->kids[j].get());
  emit(scan_maxima(l1->pts, rect, floor));

  out.assign(rev.rbegin(), rev.rend());
  return out;
}

void FourSided::insert(const Point& p) {
  std::vector<Node*> path;
  std::vector<std::size_t> idx;
  Node* u = root_.get();
  while (!u->leaf) {
    (void)u->keys.fetch();
    std::size_t j = 0;
    while (j + 1 < u->kids.size() && cmp_x(p, u->kids[j]->hi) > 0) ++j;
    path.push_back(u);
    idx.push_back(j);
    u = u->kids[j].get();
  }
  (void)u->blk.fetch();
  auto it = std::lower_bound(u->pts.begin(), u->pts.end(), p, less_x);
  if (it != u->pts.end() && cmp_x(*it, p) == 0)
    throw PreconditionError("foursided: insert of a present point");
  for (std::size_t d = 1; d < path.size(); ++d) path[d]->r->insert(swap_axes(p));
  u->pts.insert(it, p);
  ++n_;

  const std::size_t cap = st_->block_capacity();
  std::unique_ptr<Node> carry;
  if (u->pts.size() > 2 * cap) {
    carry = std::make_unique<Node>();
    const std::size_t half = u->pts.size() / 2;
    carry->pts.assign(u->pts.begin() + static_cast<std::ptrdiff_t>(half), u->pts.end());
    u->pts.resize(half);
    refresh_leaf(*carry);
  }
  refresh_leaf(*u);
  for (std::size_t d = path.size(); d-- > 0;) {
    Node* v = path[d];
    if (carry) {
      v->kids.insert(v->kids.begin() + static_cast<std::ptrdiff_t>(idx[d]) + 1,
                     std::move(carry));
      carry.reset();
    }
    if (v->kids.size() > 2 * f_) {
      carry = std::make_unique<Node>();
      carry->leaf = false;
      const std::size_t half = v->kids.size() / 2;
      for (std::size_t i = half; i < v->kids.size(); ++i)
        carry->kids.push_back(std::move(v->kids[i]));
      v->kids.resize(half);
      refresh_keys(*carry);
      rebuild_r(*carry);
      refresh_keys(*v);
      if (d > 0)
        rebuild_r(*v);
      else
        v->r.reset();  // halves of a split root are about to gain a parent
    } else {
      refresh_keys(*v);
    }
  }
  if (carry) {
    auto top = std::make_unique<Node>();
    top->leaf = false;
    if (root_->leaf) {
      // first split of a root leaf
      top->kids.push_back(std::move(root_));
    } else {
      rebuild_r(*root_);
      top->kids.push_back(std::move(root_));
    }
    top->kids.push_back(std::move(carry));
    refresh_keys(*top);
    root_ = std::move(top);
  }
  maybe_rebuild();
}

void FourSided::erase(const Point& p) {
  std::vector<Node*> path;
  std::vector<std::size_t> idx;
  Node* u = root_.get();
  while (!u->leaf) {
    (void)u->keys.fetch();
    std::size_t j = 0;
    while (j < u->kids.size() && cmp_x(p, u->kids[j]->hi) > 0) ++j;
    if (j == u->kids.size()) throw PreconditionError("foursided: erase of a missing point");
    path.push_back(u);
    idx.push_back(j);
    u = u->kids[j].get();
  }
  (void)u->blk.fetch();
  auto it = std::lower_bound(u->pts.begin(), u->pts.end(), p, less_x);
  if (it == u->pts.end() || cmp_x(*it, p) != 0 || !(*it == p))
    throw PreconditionError("foursided: erase of a missing point");
  for (std::size_t d = 1; d < path.size(); ++d) path[d]->r->erase(swap_axes(p));
  u->pts.erase(it);
  --n_;
  refresh_leaf(*u);

  const std::size_t cap = st_->block_capacity();
  for (std::size_t d = path.size(); d-- > 0;) {
    Node* v = path[d];
    std::size_t j = idx[d];
    Node* c = v->kids[j].get();
    const bool deficient = c->leaf ? c->pts.size() < cap : c->kids.size() < f_;
    if (deficient) {
      const std::size_t sj = j > 0 ? j - 1 : j + 1;
      const std::size_t L = std::min(j, sj), R = std::max(j, sj);
      Node* ln = v->kids[L].get();
      Node* rn = v->kids[R].get();
      if (ln->leaf) {
        (void)(j == L ? rn : ln)->blk.fetch();
        std::vector<Point> all = ln->pts;
        all.insert(all.end(), rn->pts.begin(), rn->pts.end());
        if (all.size() > 2 * cap) {
          const std::size_t half = all.size() / 2;
          ln->pts.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(half));
          rn->pts.assign(all.begin() + static_cast<std::ptrdiff_t>(half), all.end());
          refresh_leaf(*ln);
          refresh_leaf(*rn);
        } else {
          ln->pts = std::move(all);
          refresh_leaf(*ln);
          v->kids.erase(v->kids.begin() + static_cast<std::ptrdiff_t>(R));
        }
      } else {
        const std::size_t total = ln->kids.size() + rn->kids.size();
        if (total > 2 * f_) {
          const std::size_t half = total / 2;
          while (ln->kids.size() < half) {
            ln->kids.push_back(std::move(rn->kids.front()));
            rn->kids.erase(rn->kids.begin());
          }
          while (ln->kids.size() > half) {
            rn->kids.insert(rn->kids.begin(), std::move(ln->kids.back()));
            ln->kids.pop_back();
          }
          refresh_keys(*ln);
          refresh_keys(*rn);
          rebuild_r(*ln);
          rebuild_r(*rn);
        } else {
          for (auto& kid : rn->kids) ln->kids.push_back(std::move(kid));
          refresh_keys(*ln);
          rebuild_r(*ln);
          v->kids.erase(v->kids.begin() + static_cast<std::ptrdiff_t>(R));
        }
      }
    }
    refresh_keys(*v);
  }
  while (!root_->leaf && root_->kids.size() == 1) root_ = std::move(root_->kids.front());
  if (!root_->leaf) root_->r.reset();
  maybe_rebuild();
}

void FourSided::maybe_rebuild() {
  ++updates_;
  if (updates_ < std::max<std::size_t>(32, n0_ / 2)) return;
  std::vector<Point> pts;
  gather_points(*root_, true, pts);
  init_from(pts);
  ++rebuilds_;
}

std::vector<FourSided::NodeProbe> FourSided::probe_nodes() const {
  std::vector<NodeProbe> out;
  std::vector<std::pair<const Node*, std::size_t>> stack{{root_.get(), 0}};
  while (!stack.empty()) {
    auto [u, depth] = stack.back();
    stack.pop_back();
    NodeProbe pr;
    pr.depth = depth;
    pr.kids = u->kids.size();
    pr.has_r = u->r != nullptr;
    gather_points(*u, false, pr.pts);
    out.push_back(std::move(pr));
    for (const auto& kid : u->kids) stack.push_back({kid.get(), depth + 1});
  }
  return out;
}

InvariantReport FourSided::check_structure() const {
  InvariantReport rep;
  rep.ok = true;
  auto bad = [&rep](const std::string& what) {
    if (rep.ok) {
      rep.ok = false;
      rep.what = what;
    }
  };
  const std::size_t cap = st_->block_capacity();
  std::size_t total = 0;

  auto walk = [&](auto&& self, const Node* u, bool is_root, std::size_t depth,
                  std::size_t& leaf_depth) -> void {
    if (!rep.ok) return;
    if (u->leaf) {
      if (leaf_depth == 0)
        leaf_depth = depth + 1;
      else if (leaf_depth != depth + 1)
        bad("leaves at unequal depths");
      if (!is_root && (u->pts.size() < cap || u->pts.size() > 2 * cap))
        bad("leaf size out of range");
      if (is_root && u->pts.size() > 2 * cap) bad("root leaf too large");
      for (std::size_t i = 1; i < u->pts.size(); ++i)
        if (cmp_x(u->pts[i - 1], u->pts[i]) >= 0) bad("leaf points out of order");
      if (!u->blk) {
        bad("leaf without a block");
      } else {
        const auto* row = st_->state().need(u->blk.id());
        if (row->elems != u->pts.size()) bad("leaf block elems mismatch");
        auto pl = std::static_pointer_cast<const std::vector<Point>>(row->payload);
        if (*pl != u->pts) bad("leaf block payload mismatch");
      }
      if (!u->pts.empty() && (!(u->lo == u->pts.front()) || !(u->hi == u->pts.back())))
        bad("leaf bounds stale");
      if (u->r) bad("leaf carries a substructure");
      total += u->pts.size();
      return;
    }
    if (u->kids.size() < (is_root ? 2 : f_) || u->kids.size() > 2 * f_)
      bad("internal fan out of range");
    for (std::size_t i = 1; i < u->kids.size(); ++i)
      if (cmp_x(u->kids[i - 1]->hi, u->kids[i]->lo) >= 0) bad("children out of order");
    if (!(u->lo == u->kids.front()->lo) || !(u->hi == u->kids.back()->hi))
      bad("internal bounds stale");
    if (!u->keys) {
      bad("internal node without a key block");
    } else {
      const auto* row = st_->state().need(u->keys.id());
      if (row->elems != 2 * u->kids.size()) bad("key block elems mismatch");
      auto pl = std::static_pointer_cast<const std::vector<Point>>(row->payload);
      bool match = pl->size() == 2 * u->kids.size();
      for (std::size_t i = 0; match && i < u->kids.size(); ++i)
        match = (*pl)[2 * i] == u->kids[i]->lo && (*pl)[2 * i + 1] == u->kids[i]->hi;
      if (!match) bad("key block payload mismatch");
    }
    if (is_root) {
      if (u->r) bad("root carries a substructure");
    } else if (!u->r) {
      bad("internal node without a substructure");
    } else {
      auto sub = u->r->check_structure();
      if (!sub.ok) bad("substructure: " + sub.what);
      std::vector<Point> mine;
      gather_points(*u, false, mine);
      std::vector<Point> sw = swap_axes(mine);
      std::sort(sw.begin(), sw.end(), less_x);
      std::vector<Point> held;
      for (const auto& pr : u->r->probe_nodes())
        if (pr.depth == 0) held = pr.pts;
      if (held != sw) bad("substructure holds the wrong points");
    }
    for (const auto& kid : u->kids) self(self, kid.get(), false, depth + 1, leaf_depth);
  };
  std::size_t leaf_depth = 0;
  walk(walk, root_.get(), true, 0, leaf_depth);
  if (rep.ok && total != n_) bad("size bookkeeping off");
  return rep;
}

}  // namespace emsky
