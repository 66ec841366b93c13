#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "emsky/emblock.hpp"

namespace emsky {

// Persistent catenable double-ended sequence (a 2-3 finger tree). End access
// and update cost O(1) amortized, concatenation O(log min(|a|,|b|)), and every
// operation returns a new sequence sharing structure with its inputs. The
// spine is bookkeeping metadata: it is not block-backed and moving through it
// is never charged as a transfer; only payloads reached through the stored
// values are.
template <class T>
class PDeque {
 public:
  PDeque() = default;

  bool empty() const { return !root_; }
  std::size_t size() const { return tsize(root_); }

  const T& front() const { return std::get<T>(tfront(need())); }
  const T& back() const { return std::get<T>(tback(need())); }

  PDeque push_front(T v) const { return PDeque(tpush_front(root_, Item(std::move(v)))); }
  PDeque push_back(T v) const { return PDeque(tpush_back(root_, Item(std::move(v)))); }
  PDeque pop_front() const { return PDeque(tpop_front(need()).second); }
  PDeque pop_back() const { return PDeque(tpop_back(need()).second); }

  static PDeque concat(const PDeque& a, const PDeque& b) {
    return PDeque(app3(a.root_, {}, b.root_));
  }

  static PDeque from(std::vector<T> items) {
    PDeque d;
    for (auto& v : items) d = d.push_back(std::move(v));
    return d;
  }

  template <class F>
  void for_each(F&& f) const {
    for_each_until([&](const T& v) {
      f(v);
      return true;
    });
  }

  // f returns false to stop early; returns false iff stopped.
  template <class F>
  bool for_each_until(F&& f) const {
    return visit_tree(root_, f);
  }

  std::vector<T> to_vector() const {
    std::vector<T> out;
    out.reserve(size());
    for_each([&](const T& v) { out.push_back(v); });
    return out;
  }

  // First k values (fewer if the sequence is shorter).
  std::vector<T> front_n(std::size_t k) const {
    std::vector<T> out;
    for_each_until([&](const T& v) {
      if (out.size() == k) return false;
      out.push_back(v);
      return true;
    });
    return out;
  }

 private:
  struct Node;
  using NodePtr = std::shared_ptr<const Node>;
  using Item = std::variant<T, NodePtr>;

  struct Node {
    std::vector<Item> kids;  // 2 or 3
    std::size_t size = 0;
  };

  using Digit = std::vector<Item>;  // 1..4

  enum class Tag : std::uint8_t { Single, Deep };
  struct Tree;
  using TreePtr = std::shared_ptr<const Tree>;  // null means empty
  struct Tree {
    Tag tag = Tag::Single;
    std::optional<Item> single;
    Digit l, r;
    TreePtr mid;
    std::size_t size = 0;
  };

  explicit PDeque(TreePtr r) : root_(std::move(r)) {}

  static std::size_t isize(const Item& it) {
    if (std::holds_alternative<T>(it)) return 1;
    return std::get<NodePtr>(it)->size;
  }
  static std::size_t dsize(const Digit& d) {
    std::size_t s = 0;
    for (const Item& it : d) s += isize(it);
    return s;
  }
  static std::size_t tsize(const TreePtr& t) { return t ? t->size : 0; }

  const TreePtr& need() const {
    if (!root_) throw PreconditionError("empty sequence");
    return root_;
  }

  static NodePtr make_node(std::vector<Item> kids) {
    auto n = std::make_shared<Node>();
    n->size = dsize(kids);
    n->kids = std::move(kids);
    return n;
  }
  static TreePtr make_single(Item it) {
    auto t = std::make_shared<Tree>();
    t->tag = Tag::Single;
    t->size = isize(it);
    t->single = std::move(it);
    return t;
  }
  static TreePtr make_deep(Digit l, TreePtr mid, Digit r) {
    auto t = std::make_shared<Tree>();
    t->tag = Tag::Deep;
    t->size = dsize(l) + tsize(mid) + dsize(r);
    t->l = std::move(l);
    t->mid = std::move(mid);
    t->r = std::move(r);
    return t;
  }
  // Rebuilds a small tree from 1..4 items.
  static TreePtr from_digit(const Digit& d) {
    if (d.size() == 1) return make_single(d[0]);
    Digit l(d.begin(), d.begin() + d.size() / 2);
    Digit r(d.begin() + d.size() / 2, d.end());
    return make_deep(std::move(l), nullptr, std::move(r));
  }

  static const Item& tfront(const TreePtr& t) {
    return t->tag == Tag::Single ? *t->single : t->l.front();
  }
  static const Item& tback(const TreePtr& t) {
    return t->tag == Tag::Single ? *t->single : t->r.back();
  }

  static TreePtr tpush_front(const TreePtr& t, Item v) {
    if (!t) return make_single(std::move(v));
    if (t->tag == Tag::Single) return make_deep({std::move(v)}, nullptr, {*t->single});
    if (t->l.size() < 4) {
      Digit l;
      l.reserve(t->l.size() + 1);
      l.push_back(std::move(v));
      l.insert(l.end(), t->l.begin(), t->l.end());
      return make_deep(std::move(l), t->mid, t->r);
    }
    NodePtr overflow = make_node({t->l[1], t->l[2], t->l[3]});
    return make_deep({std::move(v), t->l[0]}, tpush_front(t->mid, Item(std::move(overflow))),
                     t->r);
  }

  static TreePtr tpush_back(const TreePtr& t, Item v) {
    if (!t) return make_single(std::move(v));
    if (t->tag == Tag::Single) return make_deep({*t->single}, nullptr, {std::move(v)});
    if (t->r.size() < 4) {
      Digit r(t->r);
      r.push_back(std::move(v));
      return make_deep(t->l, t->mid, std::move(r));
    }
    NodePtr overflow = make_node({t->r[0], t->r[1], t->r[2]});
    return make_deep(t->l, tpush_back(t->mid, Item(std::move(overflow))),
                     {t->r[3], std::move(v)});
  }

  static std::pair<Item, TreePtr> tpop_front(const TreePtr& t) {
    if (t->tag == Tag::Single) return {*t->single, nullptr};
    Item out = t->l.front();
    if (t->l.size() > 1) {
      Digit l(t->l.begin() + 1, t->l.end());
      return {std::move(out), make_deep(std::move(l), t->mid, t->r)};
    }
    if (t->mid) {
      auto [node, mid] = tpop_front(t->mid);
      return {std::move(out), make_deep(Digit(std::get<NodePtr>(node)->kids), std::move(mid), t->r)};
    }
    return {std::move(out), from_digit(t->r)};
  }

  static std::pair<Item, TreePtr> tpop_back(const TreePtr& t) {
    if (t->tag == Tag::Single) return {*t->single, nullptr};
    Item out = t->r.back();
    if (t->r.size() > 1) {
      Digit r(t->r.begin(), t->r.end() - 1);
      return {std::move(out), make_deep(t->l, t->mid, std::move(r))};
    }
    if (t->mid) {
      auto [node, mid] = tpop_back(t->mid);
      return {std::move(out), make_deep(t->l, std::move(mid), Digit(std::get<NodePtr>(node)->kids))};
    }
    return {std::move(out), from_digit(t->l)};
  }

  // Groups 2..12 items into 2-3 nodes.
  static std::vector<Item> pack_nodes(std::vector<Item> xs) {
    std::vector<Item> out;
    std::size_t i = 0;
    while (xs.size() - i > 4 || xs.size() - i == 3) {
      out.push_back(Item(make_node({xs[i], xs[i + 1], xs[i + 2]})));
      i += 3;
    }
    if (xs.size() - i == 2) {
      out.push_back(Item(make_node({xs[i], xs[i + 1]})));
    } else if (xs.size() - i == 4) {
      out.push_back(Item(make_node({xs[i], xs[i + 1]})));
      out.push_back(Item(make_node({xs[i + 2], xs[i + 3]})));
    }
    return out;
  }

  static TreePtr app3(const TreePtr& a, std::vector<Item> m, const TreePtr& b) {
    if (!a) {
      TreePtr t = b;
      for (auto it = m.rbegin(); it != m.rend(); ++it) t = tpush_front(t, std::move(*it));
      return t;
    }
    if (!b) {
      TreePtr t = a;
      for (auto& it : m) t = tpush_back(t, std::move(it));
      return t;
    }
    if (a->tag == Tag::Single) {
      TreePtr t = app3(nullptr, std::move(m), b);
      return tpush_front(t, *a->single);
    }
    if (b->tag == Tag::Single) {
      TreePtr t = app3(a, std::move(m), nullptr);
      return tpush_back(t, *b->single);
    }
    std::vector<Item> mids;
    mids.reserve(a->r.size() + m.size() + b->l.size());
    mids.insert(mids.end(), a->r.begin(), a->r.end());
    for (auto& it : m) mids.push_back(std::move(it));
    mids.insert(mids.end(), b->l.begin(), b->l.end());
    return make_deep(a->l, app3(a->mid, pack_nodes(std::move(mids)), b->mid), b->r);
  }

  template <class F>
  static bool visit_item(const Item& it, F& f) {
    if (std::holds_alternative<T>(it)) return f(std::get<T>(it));
    for (const Item& k : std::get<NodePtr>(it)->kids)
      if (!visit_item(k, f)) return false;
    return true;
  }
  template <class F>
  static bool visit_tree(const TreePtr& t, F& f) {
    if (!t) return true;
    if (t->tag == Tag::Single) return visit_item(*t->single, f);
    for (const Item& it : t->l)
      if (!visit_item(it, f)) return false;
    if (!visit_tree(t->mid, f)) return false;
    for (const Item& it : t->r)
      if (!visit_item(it, f)) return false;
    return true;
  }

  TreePtr root_;
};

}  // namespace emsky
