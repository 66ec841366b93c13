#include "emsky/cpqa.hpp"

#include <algorithm>
#include <utility>

namespace emsky {

namespace {
using OptElem = std::optional<Elem>;
}

// ---------- RecDeque ----------

void Cpqa::RecDeque::push_front(const Rec& r) {
  d = d.push_front(r);
  cnt += r.ntotal;
  rec += r.nrec;
}
void Cpqa::RecDeque::push_back(const Rec& r) {
  d = d.push_back(r);
  cnt += r.ntotal;
  rec += r.nrec;
}
Cpqa::Rec Cpqa::RecDeque::pop_front() {
  Rec r = d.front();
  d = d.pop_front();
  cnt -= r.ntotal;
  rec -= r.nrec;
  return r;
}
Cpqa::Rec Cpqa::RecDeque::pop_back() {
  Rec r = d.back();
  d = d.pop_back();
  cnt -= r.ntotal;
  rec -= r.nrec;
  return r;
}
Cpqa::RecDeque Cpqa::RecDeque::concat(const RecDeque& a, const RecDeque& b) {
  RecDeque r;
  r.d = PDeque<Rec>::concat(a.d, b.d);
  r.cnt = a.cnt + b.cnt;
  r.rec = a.rec + b.rec;
  return r;
}

// ---------- operations ----------

struct CpqaOps {
  using Rec = Cpqa::Rec;
  using RecDeque = Cpqa::RecDeque;
  using Buf = Cpqa::Buf;

  static bool lt(const Elem& a, const Elem& b) { return elem_less(a, b); }
  static bool le(const Elem& a, const Elem& b) { return !elem_less(b, a); }

  // Thresholds and part minima travel as optionals; disengaged means the
  // part does not exist. For a threshold that means "attrites nothing".
  static OptElem omin(const OptElem& a, const OptElem& b) {
    if (!a) return b;
    if (!b) return a;
    return lt(*a, *b) ? a : b;
  }

  // --- buffers ---

  static Buf mkbuf(BlockStore& st, std::vector<Elem> v) {
    const std::size_t n = v.size();
    EMSKY_REQUIRE(n > 0, "cpqa: empty buffer allocation");
    return st.alloc<std::vector<Elem>>(std::move(v), n, st.has_pin_scope(), "cpqa buf");
  }

  // Survivors of v under attrition by t (everything >= t dies).
  static std::vector<Elem> attrited(std::vector<Elem> v, const OptElem& t) {
    if (!t) return v;
    auto it = std::lower_bound(v.begin(), v.end(), *t, elem_less);
    v.erase(it, v.end());
    return v;
  }

  static Rec mkrec(BlockStore& st, std::vector<Elem> v, CpqaPtr child = nullptr) {
    EMSKY_REQUIRE(!v.empty(), "cpqa: empty record");
    Rec r;
    r.mn = v.front();
    r.mx = v.back();
    r.nbuf = v.size();
    r.ntotal = r.nbuf + (child ? child->total_count() : 0);
    r.nrec = 1 + (child ? child->records_total() : 0);
    r.buf = mkbuf(st, std::move(v));
    r.child = std::move(child);
    return r;
  }

  // Same buffer block, child dropped.
  static Rec strip_child(const Rec& r) {
    Rec s = r;
    s.child = nullptr;
    s.ntotal = s.nbuf;
    s.nrec = 1;
    return s;
  }

  // The queue's F buffer viewed as a (simple) record; reuses the block.
  static Rec f_as_rec(const Cpqa& q) {
    EMSKY_REQUIRE(q.nF_ > 0, "cpqa: empty F as record");
    Rec r;
    r.buf = q.F_;
    r.mn = q.fmn_;
    r.mx = q.fmx_;
    r.nbuf = q.nF_;
    r.ntotal = q.nF_;
    r.nrec = 1;
    return r;
  }

  // --- queue field helpers ---

  static std::uint64_t total(const Cpqa& q) {
    return q.nF_ + q.nL_ + q.C_.cnt + q.B_.cnt + q.cntD_;
  }

  static void set_F(Cpqa& w, std::vector<Elem> v) {
    w.nF_ = v.size();
    if (v.empty()) {
      w.F_ = Buf{};
      return;
    }
    w.fmn_ = v.front();
    w.fmx_ = v.back();
    w.F_ = mkbuf(*w.st_, std::move(v));
  }
  static void set_L(Cpqa& w, std::vector<Elem> v) {
    w.nL_ = v.size();
    if (v.empty()) {
      w.L_ = Buf{};
      return;
    }
    w.lmn_ = v.front();
    w.lmx_ = v.back();
    w.L_ = mkbuf(*w.st_, std::move(v));
  }
  static void copy_L(Cpqa& w, const Cpqa& src) {
    w.L_ = src.L_;
    w.nL_ = src.nL_;
    w.lmn_ = src.lmn_;
    w.lmx_ = src.lmx_;
  }

  static std::vector<Elem> getF(const Cpqa& q) {
    return q.nF_ ? q.F_.fetch() : std::vector<Elem>{};
  }
  static std::vector<Elem> getL(const Cpqa& q) {
    return q.nL_ ? q.L_.fetch() : std::vector<Elem>{};
  }

  static OptElem fmin(const Cpqa& q) { return q.nF_ ? OptElem(q.fmn_) : std::nullopt; }
  static OptElem lmin(const Cpqa& q) { return q.nL_ ? OptElem(q.lmn_) : std::nullopt; }
  static OptElem cmin(const Cpqa& q) {
    return q.C_.empty() ? std::nullopt : OptElem(q.C_.front().mn);
  }
  static OptElem bmin(const Cpqa& q) {
    return q.B_.empty() ? std::nullopt : OptElem(q.B_.front().mn);
  }
  static OptElem d1min(const Cpqa& q) {
    return q.D_.empty() ? std::nullopt : OptElem(q.D_.front().front().mn);
  }

  // Smallest alive element strictly after the C part / after the B part.
  // Every element of B, D, L is >= its part head's min, and the smallest of
  // those heads cannot be attrited by anything later, so the plain minimum
  // of the cached heads is exact even when some head is itself dead.
  static OptElem tau_after_C(const Cpqa& q) {
    return omin(bmin(q), omin(d1min(q), lmin(q)));
  }
  static OptElem tau_after_B(const Cpqa& q) { return omin(d1min(q), lmin(q)); }

  // Physical minimum of the whole queue (= min alive, F first when present).
  static OptElem meta_min(const Cpqa& q) {
    return omin(fmin(q), omin(cmin(q), tau_after_C(q)));
  }

  // True when every alive element at or after the part bounded below by t is
  // dead under attrition by e; a disengaged bound means the region is empty.
  static bool region_dead(const Elem& e, const OptElem& t) { return !t || le(e, *t); }

  enum class Cut { None, All, Part };
  static Cut cut_of(const Rec& r, const OptElem& t) {
    if (!t) return Cut::None;
    if (lt(r.mx, *t)) return Cut::None;
    if (!lt(r.mn, *t)) return Cut::All;
    return Cut::Part;
  }

  // Largest alive element of the C part. In clean states this is the cached
  // max of last(C); when B and D are empty that record may carry a tail that
  // L has already attrited, so measure against the smallest alive element
  // after C. Gates on this value are exact: the alive subsequence increases
  // along the queue, so anything at or above it in later parts is dead.
  static OptElem alive_cmax(const Cpqa& q) {
    if (q.C_.empty()) return std::nullopt;
    const Rec& r = q.C_.back();
    const OptElem t = tau_after_C(q);
    switch (cut_of(r, t)) {
      case Cut::None:
        return OptElem(r.mx);
      case Cut::All:
        throw InternalError("invariant violated: last clean record has no alive head");
      case Cut::Part: {
        std::vector<Elem> v = attrited(r.buf.fetch(), t);
        return OptElem(v.back());
      }
    }
    return std::nullopt;
  }

  // --- dirty deque aggregates ---

  static void pushD_front(Cpqa& w, const RecDeque& dd) {
    EMSKY_REQUIRE(!dd.empty(), "cpqa: empty dirty deque");
    w.D_ = w.D_.push_front(dd);
    w.sumD_ += dd.size();
    w.cntD_ += dd.cnt;
    w.recD_ += dd.rec;
  }
  static void pushD_back(Cpqa& w, const RecDeque& dd) {
    EMSKY_REQUIRE(!dd.empty(), "cpqa: empty dirty deque");
    w.D_ = w.D_.push_back(dd);
    w.sumD_ += dd.size();
    w.cntD_ += dd.cnt;
    w.recD_ += dd.rec;
  }
  static RecDeque popD_front(Cpqa& w) {
    RecDeque dd = w.D_.front();
    w.D_ = w.D_.pop_front();
    w.sumD_ -= dd.size();
    w.cntD_ -= dd.cnt;
    w.recD_ -= dd.rec;
    return dd;
  }
  static RecDeque popD_back(Cpqa& w) {
    RecDeque dd = w.D_.back();
    w.D_ = w.D_.pop_back();
    w.sumD_ -= dd.size();
    w.cntD_ -= dd.cnt;
    w.recD_ -= dd.rec;
    return dd;
  }
  static void clear_D(Cpqa& w) {
    w.D_ = PDeque<RecDeque>{};
    w.sumD_ = 0;
    w.cntD_ = 0;
    w.recD_ = 0;
  }
  static void adoptD_front(Cpqa& w, const Cpqa& src) {
    w.D_ = PDeque<RecDeque>::concat(src.D_, w.D_);
    w.sumD_ += src.sumD_;
    w.cntD_ += src.cntD_;
    w.recD_ += src.recD_;
  }

  static Cpqa blank(BlockStore& st, std::size_t b) {
    Cpqa w;
    w.st_ = &st;
    w.b_ = b;
    return w;
  }
  static CpqaPtr seal(Cpqa w) { return std::make_shared<const Cpqa>(std::move(w)); }

  // Rest of q once F and L have been taken by the parent; null when empty.
  static CpqaPtr child_of(const Cpqa& q) {
    Cpqa c = blank(*q.st_, q.b_);
    c.C_ = q.C_;
    c.B_ = q.B_;
    c.D_ = q.D_;
    c.sumD_ = q.sumD_;
    c.cntD_ = q.cntD_;
    c.recD_ = q.recD_;
    if (total(c) == 0) return nullptr;
    return seal(std::move(c));
  }

  // ---------- Bias ----------
  // Returns true when anything changed. One call includes the paper's
  // tail recursion (after a head record is discarded with B drained).

  static bool bias(Cpqa& w) {
    if (!w.B_.empty()) {
      bias_B(w);
      return true;
    }
    const std::size_t k = w.D_.size();
    if (k > 1) {
      bias_k2(w);
      return true;
    }
    if (k == 1) {
      bias_k1(w);
      return true;
    }
    // k = 0: with every deque empty and L nonempty, pull L forward. The
    // cut by min(L) is a no-op at rest (F is fully alive) and only bites
    // mid-operation, when F can carry a freshly imported dead tail.
    if (w.C_.empty() && w.nL_ > 0 && w.nF_ <= 2 * w.b_) {
      std::vector<Elem> f = attrited(getF(w), lmin(w));
      std::vector<Elem> l = getL(w);
      const std::size_t take = std::min(w.b_, l.size());
      f.insert(f.end(), l.begin(), l.begin() + static_cast<std::ptrdiff_t>(take));
      l.erase(l.begin(), l.begin() + static_cast<std::ptrdiff_t>(take));
      set_F(w, std::move(f));
      set_L(w, std::move(l));
      return true;
    }
    return false;
  }

  // |B| > 0.
  static void bias_B(Cpqa& w) {
    const std::size_t b = w.b_;
    bool discarded = false;
    Rec r1 = w.B_.pop_front();
    const OptElem e = w.D_.empty() ? lmin(w) : d1min(w);
    if (cut_of(r1, e) == Cut::None) {
      w.C_.push_back(r1);
      return;
    }
    // r1 is cut by e, so a record min at or above e marks a dead record;
    // mins increase along B, so the dead ones form a suffix (usually all
    // of the rest)
    while (!w.B_.empty() && !elem_less(w.B_.back().mn, *e)) w.B_.pop_back();
    std::vector<Elem> l1 = attrited(r1.buf.fetch(), e);
    if (!w.B_.empty()) {
      // records with live heads remain behind the cut; fold them into r1's
      // survivors until a clean record's worth accumulates. An element at or
      // past the next live head is dead, as is anything at or above e. Each
      // folded record leaves B for good, so the fetches amortize.
      for (;;) {
        EMSKY_REQUIRE(!l1.empty(), "cpqa: live record behind a dead buffer head");
        l1 = attrited(l1, OptElem(w.B_.front().mn));
        if (l1.size() >= b) break;
        Rec rf = w.B_.pop_front();
        std::vector<Elem> lf = attrited(rf.buf.fetch(), e);
        l1.insert(l1.end(), lf.begin(), lf.end());
        if (w.B_.empty()) break;
      }
      if (l1.size() >= b) {
        if (l1.size() <= 4 * b) {
          w.C_.push_back(mkrec(*w.st_, std::move(l1)));
        } else {
          const std::size_t half = l1.size() / 2;
          std::vector<Elem> h1(l1.begin(), l1.begin() + static_cast<std::ptrdiff_t>(half));
          l1.erase(l1.begin(), l1.begin() + static_cast<std::ptrdiff_t>(half));
          w.C_.push_back(mkrec(*w.st_, std::move(h1)));
          w.C_.push_back(mkrec(*w.st_, std::move(l1)));
        }
        return;
      }
      EMSKY_REQUIRE(w.B_.empty(), "cpqa: short fold with records left behind");
      // B exhausted with fewer than b survivors: continue below
    }
    if (w.D_.empty()) {
      if (l1.size() >= b) {
        w.C_.push_back(mkrec(*w.st_, std::move(l1)));
      } else if (l1.size() + w.nL_ <= 3 * b) {
        std::vector<Elem> l = getL(w);
        l1.insert(l1.end(), l.begin(), l.end());
        set_L(w, std::move(l1));
        discarded = true;
      } else {
        std::vector<Elem> l = getL(w);
        l1.insert(l1.end(), l.begin(), l.end());
        std::vector<Elem> head(l1.begin(), l1.begin() + static_cast<std::ptrdiff_t>(2 * b));
        l1.erase(l1.begin(), l1.begin() + static_cast<std::ptrdiff_t>(2 * b));
        w.C_.push_back(mkrec(*w.st_, std::move(head)));
        set_L(w, std::move(l1));
      }
    } else {
      if (l1.size() >= b) {
        w.C_.push_back(mkrec(*w.st_, std::move(l1)));
      } else {
        RecDeque dd = popD_front(w);
        Rec r2 = dd.pop_front();
        if (l1.empty()) {
          dd.push_front(r2);
          pushD_front(w, dd);
          discarded = true;
        } else {
          std::vector<Elem> l2 = r2.buf.fetch();
          if (l1.size() + l2.size() <= 4 * b) {
            l1.insert(l1.end(), l2.begin(), l2.end());
            dd.push_front(mkrec(*w.st_, std::move(l1), r2.child));
            pushD_front(w, dd);
            discarded = true;
          } else {
            l1.insert(l1.end(), l2.begin(), l2.end());
            std::vector<Elem> head(l1.begin(), l1.begin() + static_cast<std::ptrdiff_t>(2 * b));
            l1.erase(l1.begin(), l1.begin() + static_cast<std::ptrdiff_t>(2 * b));
            w.C_.push_back(mkrec(*w.st_, std::move(head)));
            dd.push_front(mkrec(*w.st_, std::move(l1), r2.child));
            pushD_front(w, dd);
            // the dirty head may now start at or above min(L): then every
            // dirty element (children included) is dead
            if (w.nL_ > 0 && le(w.lmn_, w.D_.front().front().mn)) clear_D(w);
          }
        }
      }
    }
    if (discarded) bias(w);  // |B| = 0 now; cannot reenter this case
  }

  // |B| = 0, k > 1: work on the last two dirty deques.
  static void bias_k2(Cpqa& w) {
    const std::size_t b = w.b_;
    RecDeque dk = popD_back(w);
    if (w.nL_ > 0 && le(w.lmn_, dk.front().mn)) return;  // D_k entirely dead
    const Elem e = dk.front().mn;
    RecDeque dk1 = popD_back(w);
    bool join = true;
    if (le(e, dk1.back().mn)) {
      dk1.pop_back();  // dead record; its child dies with it
      join = false;
    } else if (le(e, dk1.back().mx)) {
      Rec r1 = dk1.pop_back();
      // r1 was attrited, so anything after its buffer (its child included)
      // is at or above e and dead
      std::vector<Elem> l1 = attrited(r1.buf.fetch(), OptElem(e));
      Rec r2 = dk.pop_front();
      std::vector<Elem> l2 = r2.buf.fetch();
      if (l1.size() + l2.size() <= 4 * b) {
        l1.insert(l1.end(), l2.begin(), l2.end());
        dk.push_front(mkrec(*w.st_, std::move(l1), r2.child));
      } else {
        l1.insert(l1.end(), l2.begin(), l2.end());
        const std::size_t half = l1.size() / 2;
        std::vector<Elem> h1(l1.begin(), l1.begin() + static_cast<std::ptrdiff_t>(half));
        l1.erase(l1.begin(), l1.begin() + static_cast<std::ptrdiff_t>(half));
        dk1.push_back(mkrec(*w.st_, std::move(h1)));
        dk.push_front(mkrec(*w.st_, std::move(l1), r2.child));
      }
    }
    if (join) {
      pushD_back(w, RecDeque::concat(dk1, dk));
    } else {
      if (!dk1.empty()) pushD_back(w, dk1);
      pushD_back(w, dk);
    }
  }

  // |B| = 0, k = 1.
  static void bias_k1(Cpqa& w) {
    const std::size_t b = w.b_;
    RecDeque d1 = popD_front(w);
    Rec r = d1.pop_front();
    if (w.nL_ > 0 && !d1.empty() && le(w.lmn_, d1.front().mn)) d1 = RecDeque{};
    if (w.nL_ > 0 && le(w.lmn_, r.mx)) {
      // attrited head: by I.2 the rest already starts above min(L)
      EMSKY_REQUIRE(d1.empty(), "cpqa: dirty rest outlived an attrited head");
      std::vector<Elem> lp = attrited(r.buf.fetch(), lmin(w));  // child dies too
      std::vector<Elem> l = getL(w);
      lp.insert(lp.end(), l.begin(), l.end());
      if (lp.size() <= 3 * b) {
        set_L(w, std::move(lp));
      } else {
        std::vector<Elem> head(lp.begin(), lp.begin() + static_cast<std::ptrdiff_t>(2 * b));
        lp.erase(lp.begin(), lp.begin() + static_cast<std::ptrdiff_t>(2 * b));
        w.C_.push_back(mkrec(*w.st_, std::move(head)));
        set_L(w, std::move(lp));
      }
    } else {
      // max(buffer) < min(L): promote the buffer, then absorb the child
      w.C_.push_back(strip_child(r));
      if (!d1.empty()) pushD_front(w, d1);
      if (r.child) merge_child(w, *r.child);
    }
  }

  // Merge child queue c into w (B empty, the promoted buffer just joined C).
  // Cut threshold: smallest element of w following the child's position.
  static void merge_child(Cpqa& w, const Cpqa& c) {
    EMSKY_REQUIRE(w.B_.empty(), "cpqa: merge with nonempty B");
    const OptElem e = omin(d1min(w), lmin(w));
    if (e) {
      const OptElem cm = meta_min(c);
      EMSKY_REQUIRE(cm.has_value(), "cpqa: empty child");
      if (le(*e, *cm)) return;  // child entirely dead
    }
    if (!c.C_.empty() && e) {
      const OptElem am = alive_cmax(c);
      if (am && le(*e, *am)) {
        // cut lands inside the child's C: it becomes w's buffer deque
        w.B_ = c.C_;
        return;
      }
    }
    // cut is past the child's C (or nothing is attrited)
    w.C_ = RecDeque::concat(w.C_, c.C_);
    const bool dirty_dead = e && region_dead(*e, d1min(c));
    if (dirty_dead) {
      const OptElem bm = bmin(c);
      if (bm && (!e || lt(*bm, *e))) w.B_ = c.B_;  // alive head: keep lazily
      return;
    }
    // cut inside the child's dirty region (or no attrition at all)
    w.B_ = c.B_;
    adoptD_front(w, c);
  }

  // ---------- Fill ----------
  // Round: r = first(C); buffers of >= 2b alive elements donate their first
  // b, smaller ones are imported whole (record discarded, one Bias call).
  // Deviations from the one-round rule, both forced by lazily kept dead
  // tails: imports are attrited by the smallest element after r (otherwise a
  // dead tail of the last clean record could surface through F), and rounds
  // repeat until |F| >= b, with Bias pulling content toward C in between.

  static void fill(Cpqa& w) {
    std::uint64_t guard = 64 + 8 * (w.C_.rec + w.B_.rec + w.recD_ + total(w) / w.b_ + 4);
    while (w.nF_ < w.b_ && total(w) >= w.b_) {
      EMSKY_REQUIRE(guard-- > 0, "cpqa: fill failed to converge");
      if (w.C_.empty()) {
        const bool changed = bias(w);
        EMSKY_REQUIRE(changed, "cpqa: fill stalled with empty C");
        continue;
      }
      Rec r = w.C_.pop_front();
      const OptElem t = omin(cmin(w), tau_after_C(w));
      std::vector<Elem> lv = attrited(r.buf.fetch(), t);
      std::vector<Elem> f = getF(w);
      if (lv.size() >= 2 * w.b_) {
        f.insert(f.end(), lv.begin(), lv.begin() + static_cast<std::ptrdiff_t>(w.b_));
        lv.erase(lv.begin(), lv.begin() + static_cast<std::ptrdiff_t>(w.b_));
        set_F(w, std::move(f));
        w.C_.push_front(mkrec(*w.st_, std::move(lv)));
      } else {
        f.insert(f.end(), lv.begin(), lv.end());
        set_F(w, std::move(f));
        bias(w);
      }
    }
  }

  // ---------- CatenateAndAttrite ----------

  static CpqaPtr catenate(const CpqaPtr& q1p, const CpqaPtr& q2p) {
    const Cpqa& q1 = *q1p;
    const Cpqa& q2 = *q2p;
    if (q1.st_ != q2.st_ || q1.b_ != q2.b_)
      throw PreconditionError("catenate_and_attrite: queues disagree on store or b");
    if (total(q2) == 0) return q1p;
    if (total(q1) == 0) return q2p;
    const Elem e = q2.fmn_;  // min(Q2) = min(F(Q2))
    if (total(q1) < q1.b_) return cat_small_q1(q1, q2, e);
    if (total(q2) < q2.b_) return cat_small_q2(q1, q2, e);
    return cat_large(q1p, q2p, e);
  }

  // |Q1| < b: Q1 is a bare first buffer.
  static CpqaPtr cat_small_q1(const Cpqa& q1, const Cpqa& q2, const Elem& e) {
    std::vector<Elem> f = attrited(getF(q1), OptElem(e));
    if (f.empty()) return seal(q2);
    Cpqa w = q2;
    std::vector<Elem> f2 = getF(w);
    f.insert(f.end(), f2.begin(), f2.end());
    spill_F(w, std::move(f));
    return seal(std::move(w));
  }

  // Install f as F, moving a trailing chunk of 2b into a record prepended
  // onto C whenever f exceeds 4b (possible at most once per call here).
  static void spill_F(Cpqa& w, std::vector<Elem> f) {
    if (f.size() > 4 * w.b_) {
      std::vector<Elem> spill(f.end() - static_cast<std::ptrdiff_t>(2 * w.b_), f.end());
      f.resize(f.size() - 2 * w.b_);
      w.C_.push_front(mkrec(*w.st_, std::move(spill)));
    }
    EMSKY_REQUIRE(f.size() <= 4 * w.b_, "cpqa: F overflow");
    set_F(w, std::move(f));
  }

  enum class Where { Clean, Buffer, Dirty };

  static Rec pop_last_record(Cpqa& w, Where& where) {
    if (!w.D_.empty()) {
      where = Where::Dirty;
      RecDeque dd = popD_back(w);
      Rec r = dd.pop_back();
      if (!dd.empty()) pushD_back(w, dd);
      return r;
    }
    if (!w.B_.empty()) {
      where = Where::Buffer;
      return w.B_.pop_back();
    }
    EMSKY_REQUIRE(!w.C_.empty(), "cpqa: no record to pop");
    where = Where::Clean;
    return w.C_.pop_back();
  }

  static void append_records(Cpqa& w, Where where, const Rec& r, const Rec* extra) {
    switch (where) {
      case Where::Dirty: {
        RecDeque dd = w.D_.empty() ? RecDeque{} : popD_back(w);
        dd.push_back(r);
        if (extra) dd.push_back(*extra);
        pushD_back(w, dd);
        break;
      }
      case Where::Buffer:
        w.B_.push_back(r);
        if (extra) w.B_.push_back(*extra);
        break;
      case Where::Clean:
        w.C_.push_back(r);
        if (extra) w.C_.push_back(*extra);
        break;
    }
  }

  // |Q2| < b, |Q1| >= b: Q2 is a bare first buffer.
  static CpqaPtr cat_small_q2(const Cpqa& q1, const Cpqa& q2, const Elem& e) {
    std::vector<Elem> f2 = getF(q2);
    Cpqa w = q1;
    const bool has_rec =
        !(w.C_.empty() && w.B_.empty() && w.D_.empty());
    if (has_rec) {
      Where where;
      Cpqa probe = w;
      const Rec last = pop_last_record(probe, where);
      if (le(e, last.mn)) {
        w = std::move(probe);  // r deleted, child and all
        small_q2_sub(w, e, std::move(f2));
      } else if (w.nL_ > 0 && le(e, w.lmn_)) {
        set_L(w, std::move(f2));  // old L entirely dead
      } else {
        case3(w, e, std::move(f2), true);
      }
    } else {
      if (le(e, w.fmn_)) return seal(q2);
      if (le(e, w.fmx_)) {
        // cut inside F: whatever L holds starts above max(F) and dies
        std::vector<Elem> f = attrited(getF(w), OptElem(e));
        f.insert(f.end(), f2.begin(), f2.end());
        set_L(w, {});
        spill_F(w, std::move(f));
      } else if (w.nL_ > 0 && le(e, w.lmn_)) {
        set_L(w, std::move(f2));
      } else {
        case3(w, e, std::move(f2), false);
      }
    }
    fill(w);
    return seal(std::move(w));
  }

  // Sub-cases of |Q2| < b once the last record is deleted (e <= its min).
  static void small_q2_sub(Cpqa& w, const Elem& e, std::vector<Elem> f2) {
    if (le(e, w.fmn_)) {
      // everything of Q1 is attrited: the result is the bare f2
      Cpqa r = blank(*w.st_, w.b_);
      set_F(r, std::move(f2));
      w = std::move(r);
      return;
    }
    const OptElem tc = tau_after_C(w);
    {
      // at rest a root F is fully alive, so with C empty its max is the
      // alive end of the F,C prefix
      const OptElem am = w.C_.empty() ? OptElem(w.fmx_) : alive_cmax(w);
      if (am && le(e, *am)) {
        // cut inside F or C: C prefixed by the F record becomes the buffer
        // deque; B, D and L start at or above the first alive element
        // after C, which exceeds e, so they are dead
        RecDeque nb = w.C_;
        nb.push_front(f_as_rec(w));
        w.C_ = RecDeque{};
        w.B_ = nb;
        clear_D(w);
        set_F(w, {});
        set_L(w, std::move(f2));
        bias(w);
        return;  // caller runs fill
      }
    }
    if (region_dead(e, tc)) {
      // cut between C and B: everything after C dies
      w.B_ = RecDeque{};
      clear_D(w);
      set_L(w, std::move(f2));
      return;
    }
    if (region_dead(e, tau_after_B(w))) {
      // cut inside B: keep it lazily, D and L die
      clear_D(w);
      set_L(w, std::move(f2));
      return;
    }
    // cut inside the dirty region or L
    std::vector<Elem> stream = attrited(getL(w), OptElem(e));
    stream.insert(stream.end(), f2.begin(), f2.end());
    if (stream.size() <= 4 * w.b_) {
      set_L(w, std::move(stream));
      return;
    }
    std::vector<Elem> head(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(4 * w.b_));
    stream.erase(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(4 * w.b_));
    RecDeque nd;
    nd.push_back(mkrec(*w.st_, std::move(head)));
    pushD_back(w, nd);
    set_L(w, std::move(stream));
    bias(w);
    bias(w);
  }

  // min(L(Q1)) < e (or L empty): the cut lands inside the last record's
  // reach or in L itself.
  static void case3(Cpqa& w, const Elem& e, std::vector<Elem> f2, bool has_rec) {
    const std::size_t b = w.b_;
    if (!has_rec && w.nL_ == 0) {
      // bare large F: splice the cut into F directly
      std::vector<Elem> f = attrited(getF(w), OptElem(e));
      f.insert(f.end(), f2.begin(), f2.end());
      spill_F(w, std::move(f));
      return;
    }
    const OptElem old_lmin = lmin(w);
    std::vector<Elem> stream = attrited(getL(w), OptElem(e));
    stream.insert(stream.end(), f2.begin(), f2.end());
    if (stream.size() <= 4 * b) {
      set_L(w, std::move(stream));
      return;
    }
    // Pop the last record to refill it from the stream. A record whose whole
    // buffer sits at or above old min(L) is entirely dead (child included;
    // I.1 puts the child above the buffer) and refilling it would break I.2
    // against its predecessor, so such records are discarded outright.
    Rec r;
    Where where = Where::Clean;
    bool have = false;
    while (!(w.C_.empty() && w.B_.empty() && w.D_.empty())) {
      r = pop_last_record(w, where);
      if (cut_of(r, old_lmin) != Cut::All) {
        have = true;
        break;
      }
    }
    if (!have) {
      std::vector<Elem> head(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(3 * b));
      stream.erase(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(3 * b));
      w.C_.push_back(mkrec(*w.st_, std::move(head)));
      set_L(w, std::move(stream));
      return;
    }
    std::vector<Elem> l = r.buf.fetch();
    std::vector<Elem> lp = attrited(l, old_lmin);
    if (lp.size() < l.size()) {
      // the tail of r sat above old min(L); so does r's child, which dies.
      // Refill the buffer to 4b from the stream.
      std::size_t need = std::min(4 * b - lp.size(), stream.size());
      lp.insert(lp.end(), stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(need));
      stream.erase(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(need));
      r = mkrec(*w.st_, std::move(lp));
    }
    if (stream.size() > 3 * b) {
      std::vector<Elem> head(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(3 * b));
      stream.erase(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(3 * b));
      // the new record joins r's own deque; the paper states D_k, which is
      // where the last record lives whenever dirty deques exist at all
      const Rec nr = mkrec(*w.st_, std::move(head));
      append_records(w, where, r, &nr);
      if (where == Where::Dirty) bias(w);
    } else {
      append_records(w, where, r, nullptr);
    }
    set_L(w, std::move(stream));
  }

  // F(Q2) as a dirty record whose child carries the rest of Q2.
  static Rec q2_head_rec(const Cpqa& q2) {
    Rec dr = f_as_rec(q2);
    CpqaPtr child = child_of(q2);
    dr.ntotal = dr.nbuf + (child ? child->total_count() : 0);
    dr.nrec = 1 + (child ? child->records_total() : 0);
    dr.child = std::move(child);
    return dr;
  }

  // |Q1| >= b and |Q2| >= b.
  static CpqaPtr cat_large(const CpqaPtr& q1p, const CpqaPtr& q2p, const Elem& e) {
    const Cpqa& q1 = *q1p;
    const Cpqa& q2 = *q2p;
    if (le(e, q1.fmn_)) return q2p;
    const std::size_t b = q1.b_;

    {
      // at rest a root F is fully alive, so with C empty its max is the
      // alive end of the F,C prefix
      const OptElem am = q1.C_.empty() ? OptElem(q1.fmx_) : alive_cmax(q1);
      if (am && le(e, *am)) {
        // cut inside F or C of Q1: they become the buffer deque, Q2's F
        // becomes the head of a single dirty deque holding the rest of Q2
        // as its child; B, D, L of Q1 are dead
        Cpqa w = blank(*q1.st_, b);
        RecDeque nb = q1.C_;
        nb.push_front(f_as_rec(q1));
        w.B_ = nb;
        RecDeque nd;
        nd.push_back(q2_head_rec(q2));
        pushD_back(w, nd);
        copy_L(w, q2);
        bias(w);
        bias(w);
        fill(w);
        return seal(std::move(w));
      }
    }
    if (region_dead(e, tau_after_C(q1)) || region_dead(e, tau_after_B(q1))) {
      // cut between C and B, or inside B: keep F and C (and B in the second
      // case), everything dirtier is dead
      Cpqa w = q1;
      if (region_dead(e, tau_after_C(q1))) w.B_ = RecDeque{};
      clear_D(w);
      RecDeque nd;
      nd.push_back(q2_head_rec(q2));
      pushD_back(w, nd);
      copy_L(w, q2);
      bias(w);
      bias(w);
      fill(w);
      return seal(std::move(w));
    }
    // cut inside the dirty region or L of Q1: survivors of L(Q1) are glued
    // to F(Q2) and pushed onto the head of Q2's clean deque; the head comes
    // back out as the record of a brand new dirty deque of Q1
    Cpqa w = q1;
    std::vector<Elem> stream = attrited(getL(q1), OptElem(e));
    std::vector<Elem> f2 = getF(q2);
    stream.insert(stream.end(), f2.begin(), f2.end());
    Cpqa c = blank(*q1.st_, b);
    c.C_ = q2.C_;
    c.B_ = q2.B_;
    c.D_ = q2.D_;
    c.sumD_ = q2.sumD_;
    c.cntD_ = q2.cntD_;
    c.recD_ = q2.recD_;
    std::vector<Elem> headv;
    if (stream.size() <= 4 * b) {
      headv = std::move(stream);
    } else {
      const std::size_t half = stream.size() / 2;
      headv.assign(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(half));
      stream.erase(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(half));
      c.C_.push_front(mkrec(*q1.st_, std::move(stream)));
    }
    CpqaPtr child = total(c) ? seal(std::move(c)) : nullptr;
    RecDeque nd;
    nd.push_back(mkrec(*q1.st_, std::move(headv), std::move(child)));
    pushD_back(w, nd);
    copy_L(w, q2);
    bias(w);
    bias(w);
    fill(w);
    return seal(std::move(w));
  }

  // ---------- invariants ----------
  // Peek-only walk; records the first violation and stops.

  static bool inv_fail(std::string& fail, const std::string& what) {
    if (fail.empty()) fail = what;
    return false;
  }

  static bool inv_sorted(const std::vector<Elem>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!elem_less(v[i - 1], v[i])) return false;
    return true;
  }

  static bool inv_rec(std::string& fail, const Rec& r, const Cpqa& q, bool must_be_simple,
                      const std::string& at) {
    if (!r.buf) return inv_fail(fail, at + ": record without buffer");
    const auto& v = r.buf.peek();
    if (v.empty() || v.size() != r.nbuf) return inv_fail(fail, at + ": buffer size mismatch");
    if (!inv_sorted(v)) return inv_fail(fail, at + ": buffer not strictly increasing");
    if (!elem_eq(v.front(), r.mn) || !elem_eq(v.back(), r.mx))
      return inv_fail(fail, at + ": cached min/max mismatch");
    if (r.nbuf < q.b_ || r.nbuf > 4 * q.b_)
      return inv_fail(fail, at + ": buffer size out of [b,4b]");
    if (must_be_simple && r.child) return inv_fail(fail, at + ": I.6 record not simple");
    const std::uint64_t ct = r.child ? r.child->total_count() : 0;
    const std::uint64_t cr = r.child ? r.child->records_total() : 0;
    if (r.ntotal != r.nbuf + ct || r.nrec != 1 + cr)
      return inv_fail(fail, at + ": cached counts mismatch");
    if (r.child) {
      if (r.child->empty()) return inv_fail(fail, at + ": empty child");
      const OptElem cm = meta_min(*r.child);
      if (!cm || !elem_less(r.mx, *cm))
        return inv_fail(fail, at + ": I.1 max(buffer) !< min(child)");
      if (!inv_queue(fail, *r.child, true, at + ".child")) return false;
    }
    return true;
  }

  // strict_pairs: consecutive records must satisfy max(r1) < min(r2). Clean
  // and buffer records may carry lazily attrited tails reaching past the next
  // record's min, so for them I.2 is checked on the mins alone; an element at
  // or above the next record's min is dead and gets dropped when its record is
  // consumed. Dirty deques are rebuilt eagerly on every join and stay strict.
  static bool inv_deque(std::string& fail, const RecDeque& dd, const Cpqa& q, bool simple,
                        bool strict_pairs, const std::string& at, std::uint64_t* cnt,
                        std::uint64_t* rec) {
    std::uint64_t c = 0, rc = 0;
    bool ok = true;
    bool have_prev = false;
    Elem prev_mx{};
    Elem prev_mn{};
    std::size_t i = 0;
    dd.d.for_each([&](const Rec& r) {
      if (!ok) return;
      const std::string here = at + "[" + std::to_string(i) + "]";
      if (!inv_rec(fail, r, q, simple, here)) {
        ok = false;
        return;
      }
      if (have_prev && strict_pairs && !elem_less(prev_mx, r.mn)) {
        inv_fail(fail, here + ": I.2 order between consecutive records");
        ok = false;
        return;
      }
      if (have_prev && !strict_pairs && !elem_less(prev_mn, r.mn)) {
        inv_fail(fail, here + ": I.2 record mins not increasing");
        ok = false;
        return;
      }
      c += r.ntotal;
      rc += r.nrec;
      prev_mx = r.mx;
      prev_mn = r.mn;
      have_prev = true;
      ++i;
    });
    if (!ok) return false;
    if (c != dd.cnt || rc != dd.rec) return inv_fail(fail, at + ": aggregate counts mismatch");
    *cnt = c;
    *rec = rc;
    return true;
  }

  static bool inv_queue(std::string& fail, const Cpqa& q, bool is_child, const std::string& at) {
    const std::size_t b = q.b_;
    if (q.nF_ > 4 * b) return inv_fail(fail, at + ": |F| > 4b");
    if (q.nL_ > 4 * b) return inv_fail(fail, at + ": |L| > 4b");
    if (q.nF_) {
      const auto& v = q.F_.peek();
      if (v.size() != q.nF_ || !inv_sorted(v)) return inv_fail(fail, at + ": F malformed");
      if (!elem_eq(v.front(), q.fmn_) || !elem_eq(v.back(), q.fmx_))
        return inv_fail(fail, at + ": F cached min/max mismatch");
    } else if (q.F_) {
      return inv_fail(fail, at + ": empty F holds a block");
    }
    if (q.nL_) {
      const auto& v = q.L_.peek();
      if (v.size() != q.nL_ || !inv_sorted(v)) return inv_fail(fail, at + ": L malformed");
      if (!elem_eq(v.front(), q.lmn_) || !elem_eq(v.back(), q.lmx_))
        return inv_fail(fail, at + ": L cached min/max mismatch");
    } else if (q.L_) {
      return inv_fail(fail, at + ": empty L holds a block");
    }
    if (is_child && (q.nF_ || q.nL_)) return inv_fail(fail, at + ": I.9 child with F or L");

    std::uint64_t cc = 0, cr = 0;
    if (!inv_deque(fail, q.C_, q, true, false, at + ".C", &cc, &cr)) return false;
    if (!inv_deque(fail, q.B_, q, true, false, at + ".B", &cc, &cr)) return false;
    std::uint64_t dcnt = 0, drec = 0, dsz = 0;
    {
      bool ok = true;
      std::size_t i = 0;
      q.D_.for_each([&](const RecDeque& dd) {
        if (!ok) return;
        const std::string here = at + ".D[" + std::to_string(i) + "]";
        if (dd.empty()) {
          inv_fail(fail, here + ": empty dirty deque");
          ok = false;
          return;
        }
        std::uint64_t c = 0, r = 0;
        if (!inv_deque(fail, dd, q, false, true, here, &c, &r)) {
          ok = false;
          return;
        }
        dcnt += c;
        drec += r;
        dsz += dd.size();
        ++i;
      });
      if (!ok) return false;
    }
    if (dsz != q.sumD_ || dcnt != q.cntD_ || drec != q.recD_)
      return inv_fail(fail, at + ": dirty aggregates mismatch");

    // I.3 chain with empty parts skipped. Clean records may carry lazily
    // attrited tails, so against what follows C only the mins are ordered;
    // with mins increasing along C, a live head in the last record implies
    // one in every record.
    const OptElem cm = cmin(q);
    const OptElem dm = d1min(q);
    const OptElem lm = lmin(q);
    if (q.nF_) {
      const OptElem next = omin(cm, tau_after_C(q));
      if (next && !elem_less(q.fmx_, *next))
        return inv_fail(fail, at + ": I.3 max(F) !< following min");
    }
    if (!q.C_.empty()) {
      const OptElem after = tau_after_C(q);
      if (after && !elem_less(q.C_.back().mn, *after))
        return inv_fail(fail, at + ": min(last C) !< following min");
    }
    if (dm) {
      // I.4: the head of D_1 holds the least record min among dirty records
      bool ok = true;
      bool first = true;
      q.D_.for_each([&](const RecDeque& dd) {
        dd.d.for_each([&](const Rec& r) {
          if (first) {
            first = false;
            return;
          }
          if (!elem_less(*dm, r.mn)) ok = false;
        });
      });
      if (!ok) return inv_fail(fail, at + ": I.4 min(first D1) not least among dirty records");
      if (lm && !elem_less(*dm, *lm)) return inv_fail(fail, at + ": I.5 min(first D1) !< min(L)");
    }
    if (q.delta_state() < 0) return inv_fail(fail, at + ": I.7 delta < 0");
    if (!is_child) {
      if ((q.nF_ < b) != (q.total_count() < b))
        return inv_fail(fail, at + ": I.8 |F| < b iff |Q| < b");
    }
    return true;
  }
};

// ---------- public API ----------

std::uint64_t Cpqa::total_count() const { return CpqaOps::total(*this); }

Elem Cpqa::find_min() const {
  if (empty()) throw EmptyQueueError("find_min on empty queue");
  EMSKY_REQUIRE(nF_ > 0, "cpqa: nonempty queue without first buffer");
  return fmn_;
}

long long Cpqa::delta_state() const {
  return static_cast<long long>(C_.size()) - static_cast<long long>(sumD_) -
         static_cast<long long>(D_.size());
}

std::size_t Cpqa::records_top() const { return C_.size() + B_.size() + sumD_; }

std::uint64_t Cpqa::records_total() const { return C_.rec + B_.rec + recD_; }

namespace {
double phi_f_of(double x, double b) {
  if (x < 2 * b) return 5 - 2 * x / b;
  if (x < 3 * b) return 1;
  return 2 * x / b - 5;
}
double phi_l_of(double x, double b) {
  if (x < b) return x / b;
  if (x <= 3 * b) return 1;
  return 2 * x / b - 5;
}
}  // namespace

PotentialReport Cpqa::potential() const {
  PotentialReport r;
  const double b = static_cast<double>(b_);
  if (small()) {
    r.small = true;
    r.phi_total = 3.0 * static_cast<double>(total_count()) / b;
    return r;
  }
  r.phi_f = phi_f_of(static_cast<double>(nF_), b);
  r.phi_l = phi_l_of(static_cast<double>(nL_), b);
  r.record_count = records_total();
  r.phi_total = r.phi_f + static_cast<double>(r.record_count) + r.phi_l;
  return r;
}

double Cpqa::phi_tree() const {
  const PotentialReport r = potential();
  return r.small ? r.phi_total : r.phi_total + 1.0;  // +1 per large queue
}

std::vector<BlockId> Cpqa::critical_blocks() const {
  std::vector<BlockId> ids;
  auto add = [&](const Buf& b) {
    if (b) ids.push_back(b.id());
  };
  add(F_);
  add(L_);
  for (const Rec& r : C_.d.front_n(3)) add(r.buf);
  if (!C_.empty()) add(C_.back().buf);
  if (!B_.empty()) add(B_.front().buf);
  if (!D_.empty()) {
    add(D_.front().front().buf);
    const RecDeque& dk = D_.back();
    add(dk.back().buf);
    if (dk.size() >= 2) {
      add(dk.d.pop_back().back().buf);
    } else if (D_.size() >= 2) {
      add(D_.pop_back().back().back().buf);
    }
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

CpqaPtr Cpqa::make_empty(BlockStore& st, std::size_t b) {
  if (b < 1 || b > st.block_capacity())
    throw PreconditionError("cpqa: b must lie in [1, block capacity]");
  return CpqaOps::seal(CpqaOps::blank(st, b));
}

CpqaPtr Cpqa::make_singleton(BlockStore& st, std::size_t b, Elem e) {
  return from_sorted(st, b, {e});
}

CpqaPtr Cpqa::from_sorted(BlockStore& st, std::size_t b, const std::vector<Elem>& elems) {
  if (b < 1 || b > st.block_capacity())
    throw PreconditionError("cpqa: b must lie in [1, block capacity]");
  for (std::size_t i = 1; i < elems.size(); ++i)
    if (!elem_less(elems[i - 1], elems[i]))
      throw PreconditionError("from_sorted: input not strictly increasing");
  Cpqa w = CpqaOps::blank(st, b);
  if (elems.empty()) return CpqaOps::seal(std::move(w));
  if (elems.size() <= 4 * b) {
    CpqaOps::set_F(w, elems);
    return CpqaOps::seal(std::move(w));
  }
  CpqaOps::set_F(w, std::vector<Elem>(elems.begin(), elems.begin() + static_cast<std::ptrdiff_t>(2 * b)));
  std::size_t at = 2 * b;
  while (elems.size() - at > 4 * b) {
    w.C_.push_back(CpqaOps::mkrec(
        st, std::vector<Elem>(elems.begin() + static_cast<std::ptrdiff_t>(at),
                              elems.begin() + static_cast<std::ptrdiff_t>(at + 2 * b))));
    at += 2 * b;
  }
  w.C_.push_back(CpqaOps::mkrec(
      st, std::vector<Elem>(elems.begin() + static_cast<std::ptrdiff_t>(at), elems.end())));
  return CpqaOps::seal(std::move(w));
}

std::pair<Elem, CpqaPtr> Cpqa::delete_min(const CpqaPtr& q) {
  if (!q || q->empty()) throw EmptyQueueError("delete_min on empty queue");
  Cpqa w = *q;
  std::vector<Elem> f = CpqaOps::getF(w);
  const Elem e = f.front();
  f.erase(f.begin());
  CpqaOps::set_F(w, std::move(f));
  CpqaOps::fill(w);
  return {e, CpqaOps::seal(std::move(w))};
}

CpqaPtr Cpqa::insert_and_attrite(const CpqaPtr& q, Elem e) {
  EMSKY_REQUIRE(q != nullptr, "cpqa: null queue");
  return CpqaOps::catenate(q, make_singleton(*q->st_, q->b_, e));
}

CpqaPtr Cpqa::catenate_and_attrite(const CpqaPtr& q1, const CpqaPtr& q2) {
  EMSKY_REQUIRE(q1 != nullptr && q2 != nullptr, "cpqa: null queue");
  return CpqaOps::catenate(q1, q2);
}

CpqaPtr Cpqa::bias(const CpqaPtr& q) {
  EMSKY_REQUIRE(q != nullptr, "cpqa: null queue");
  Cpqa w = *q;
  if (!CpqaOps::bias(w)) return q;
  return CpqaOps::seal(std::move(w));
}

CpqaPtr Cpqa::fill(const CpqaPtr& q) {
  EMSKY_REQUIRE(q != nullptr, "cpqa: null queue");
  Cpqa w = *q;
  CpqaOps::fill(w);
  return CpqaOps::seal(std::move(w));
}

namespace {
long long lemma_target(std::size_t records_top) {
  if (records_top <= 1) return 0;
  if (records_top == 2) return 1;
  return 2;
}
}  // namespace

CpqaPtr Cpqa::normalize_for_catenation(CpqaPtr q) {
  EMSKY_REQUIRE(q != nullptr, "cpqa: null queue");
  std::uint64_t guard = 64 + 4 * q->records_total();
  while (q->delta_state() < lemma_target(q->records_top())) {
    EMSKY_REQUIRE(guard-- > 0, "cpqa: normalization failed to converge");
    Cpqa w = *q;
    const bool changed = CpqaOps::bias(w);
    EMSKY_REQUIRE(changed, "cpqa: bias stalled below the catenation target");
    q = CpqaOps::seal(std::move(w));
  }
  return q;
}

CpqaPtr Cpqa::multi_catenate(BlockStore& st, std::size_t b, const std::vector<CpqaPtr>& qs) {
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const CpqaPtr& q = qs[i];
    EMSKY_REQUIRE(q != nullptr, "cpqa: null queue");
    if (q->st_ != &st || q->b_ != b)
      throw PreconditionError("multi_catenate: queue #" + std::to_string(i) +
                              " disagrees on store or b");
    if (q->delta_state() < lemma_target(q->records_top()))
      throw PreconditionError("multi_catenate: queue #" + std::to_string(i) +
                              " violates the delta precondition");
  }
  CpqaPtr acc = make_empty(st, b);
  for (std::size_t i = qs.size(); i-- > 0;) acc = CpqaOps::catenate(qs[i], acc);
  return acc;
}

std::vector<Elem> Cpqa::drain(CpqaPtr q) {
  EMSKY_REQUIRE(q != nullptr, "cpqa: null queue");
  std::vector<Elem> out;
  while (!q->empty()) {
    auto [e, nq] = delete_min(q);
    out.push_back(e);
    q = std::move(nq);
  }
  return out;
}

InvariantReport Cpqa::check_invariants() const {
  std::string fail;
  if (CpqaOps::inv_queue(fail, *this, false, "Q")) return {true, ""};
  return {false, fail};
}

ShapeReport Cpqa::shape() const {
  ShapeReport s;
  s.n_f = nF_;
  s.n_l = nL_;
  s.c = C_.size();
  s.bq = B_.size();
  s.k = D_.size();
  D_.for_each([&](const RecDeque& dd) { s.d_sizes.push_back(dd.size()); });
  if (!D_.empty()) {
    const Rec& f1 = D_.front().front();
    s.d1_first_simple = f1.child == nullptr;
    s.d1_first_mn = f1.mn;
    s.d1_first_mx = f1.mx;
    s.dk_first_mn = D_.back().front().mn;
    s.dk_last_mn = D_.back().back().mn;
  }
  if (nL_ > 0) s.l_mn = lmn_;
  return s;
}

// ---------- handle ----------

CpqaHandle::CpqaHandle(BlockStore& st, std::size_t b)
    : st_(&st), b_(b), q_(Cpqa::make_empty(st, b)) {}

CpqaHandle::~CpqaHandle() {
  for (BlockId id : pinned_)
    if (st_->is_live(id) && st_->is_pinned(id)) st_->unpin(id);
}

void CpqaHandle::apply(CpqaPtr nq, std::vector<BlockId> fresh) {
  q_ = std::move(nq);  // drop the old version first: dead blocks die unwritten
  std::vector<BlockId> crit = q_->critical_blocks();
  auto is_crit = [&](BlockId id) {
    return std::binary_search(crit.begin(), crit.end(), id);
  };
  for (BlockId id : fresh)
    if (!is_crit(id) && st_->is_live(id) && st_->is_pinned(id)) st_->unpin(id);
  for (BlockId id : pinned_)
    if (!is_crit(id) && st_->is_live(id) && st_->is_pinned(id)) st_->unpin(id);
  for (BlockId id : crit)
    if (!st_->is_pinned(id)) st_->pin(id, "cpqa critical");
  pinned_ = std::move(crit);
}

void CpqaHandle::insert(Elem e) {
  PinScope scope(*st_);
  CpqaPtr nq = Cpqa::insert_and_attrite(q_, e);
  apply(std::move(nq), scope.take());
}

Elem CpqaHandle::delete_min() {
  PinScope scope(*st_);
  auto [e, nq] = Cpqa::delete_min(q_);
  apply(std::move(nq), scope.take());
  return e;
}

void CpqaHandle::catenate(const CpqaPtr& q2) {
  PinScope scope(*st_);
  CpqaPtr nq = Cpqa::catenate_and_attrite(q_, q2);
  apply(std::move(nq), scope.take());
}

void CpqaHandle::replace(CpqaPtr q) {
  EMSKY_REQUIRE(q != nullptr, "cpqa: null queue");
  if (q->store() != st_ || q->buffer_param() != b_)
    throw PreconditionError("handle: queue disagrees on store or b");
  apply(std::move(q), {});
}

}  // namespace emsky
