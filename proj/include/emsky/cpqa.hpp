#pragma once

// Catenable priority queue with attrition over a simulated block store.
//
// A queue holds, in queue order: first buffer F, clean deque C, buffer deque
// B, dirty deques D_1..D_k, last buffer L. A record is a sorted buffer of
// [b, 4b] elements plus an optional child queue; the child's elements sit
// between the buffer and the following record. Catenating Q2 to Q1 removes
// every element of Q1 that is >= min(Q2) ("attrition"); most of the removal
// is lazy, so total_count() tracks physical elements, attrited or not.
//
// Versions are immutable values: every operation returns a new queue sharing
// unchanged records and spines with the old one. Record buffers live in the
// BlockStore and their transfers are counted; deque spines and the cached
// per-record min/max/count fields are uncounted bookkeeping metadata.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "emsky/emblock.hpp"
#include "emsky/pdeque.hpp"

namespace emsky {

struct Elem {
  std::int64_t key = 0;   // attrition order; the skyline use stores ybar = -y
  std::uint64_t id = 0;   // unique tag, breaks key ties
  std::int64_t aux = 0;   // opaque payload (carries x in the skyline use)
};

// Total order. Equal keys break toward the *later* id surviving attrition by
// the earlier one, which matches dominance with ties resolved by id.
inline bool elem_less(const Elem& a, const Elem& b) {
  if (a.key != b.key) return a.key < b.key;
  return a.id > b.id;
}
inline bool elem_eq(const Elem& a, const Elem& b) { return a.key == b.key && a.id == b.id; }

struct PotentialReport {
  double phi_f = 0;
  double phi_l = 0;
  std::uint64_t record_count = 0;
  double phi_total = 0;
  bool small = false;
};

struct InvariantReport {
  bool ok = true;
  std::string what;  // first violation, empty on success
};

// Structural snapshot for tests and diagnostics: part sizes plus the cached
// boundary elements that gate the case analysis.
struct ShapeReport {
  std::size_t n_f = 0, n_l = 0;
  std::size_t c = 0, bq = 0, k = 0;
  std::vector<std::size_t> d_sizes;  // records per dirty deque
  bool d1_first_simple = false;      // valid when k >= 1
  Elem d1_first_mn{}, d1_first_mx{};  // valid when k >= 1
  Elem dk_first_mn{}, dk_last_mn{};   // valid when k >= 1
  Elem l_mn{};                        // valid when n_l > 0
};

class Cpqa;
using CpqaPtr = std::shared_ptr<const Cpqa>;

class Cpqa {
 public:
  // --- observers (metadata only, no counted I/O) ---
  std::uint64_t total_count() const;
  bool empty() const { return total_count() == 0; }
  bool small() const { return total_count() < b_; }
  std::size_t buffer_param() const { return b_; }
  BlockStore* store() const { return st_; }

  Elem find_min() const;          // min(F); throws EmptyQueueError on empty
  long long delta_state() const;  // |C| - sum |D_i| - k
  std::size_t records_top() const;      // |C| + |B| + sum |D_i|
  std::uint64_t records_total() const;  // including descendants
  PotentialReport potential() const;
  // Potential of the whole version tree: Phi(Q) plus 1 if large; children
  // contribute only their records (they are part of Q, not queues of their
  // own in the accounting).
  double phi_tree() const;

  // Block ids of the critical records (first three of C, last of C, first of
  // B, first of D_1, last of D_k, second-to-last of D_k or last of D_{k-1})
  // plus the F and L buffers. Deduplicated.
  std::vector<BlockId> critical_blocks() const;

  // Evaluates the invariants by peeking (uncounted); first violation wins.
  InvariantReport check_invariants() const;

  ShapeReport shape() const;

  // --- builders and operations ---
  static CpqaPtr make_empty(BlockStore& st, std::size_t b);
  static CpqaPtr make_singleton(BlockStore& st, std::size_t b, Elem e);
  // elems strictly increasing under elem_less.
  static CpqaPtr from_sorted(BlockStore& st, std::size_t b, const std::vector<Elem>& elems);

  static std::pair<Elem, CpqaPtr> delete_min(const CpqaPtr& q);
  static CpqaPtr insert_and_attrite(const CpqaPtr& q, Elem e);
  static CpqaPtr catenate_and_attrite(const CpqaPtr& q1, const CpqaPtr& q2);
  static CpqaPtr bias(const CpqaPtr& q);  // no-op on recordless queues
  static CpqaPtr fill(const CpqaPtr& q);
  // Bias until the multi-catenation precondition holds: delta >= 2, relaxed
  // to >= 1 for two top-level records and >= 0 for at most one.
  static CpqaPtr normalize_for_catenation(CpqaPtr q);
  // Right-to-left fold by catenate_and_attrite. Every queue must satisfy the
  // normalize_for_catenation target; violation throws PreconditionError
  // naming the queue.
  static CpqaPtr multi_catenate(BlockStore& st, std::size_t b, const std::vector<CpqaPtr>& qs);

  // Repeated delete_min on a copy until empty (counted like any other ops).
  static std::vector<Elem> drain(CpqaPtr q);

  Cpqa(const Cpqa&) = default;
  Cpqa(Cpqa&&) = default;
  Cpqa& operator=(const Cpqa&) = default;
  Cpqa& operator=(Cpqa&&) = default;

 private:
  friend struct CpqaOps;
  Cpqa() = default;

  using Buf = BlockRef<std::vector<Elem>>;

  struct Rec {
    Buf buf;
    CpqaPtr child;            // null for simple records
    Elem mn{}, mx{};          // cached buf.front()/back()
    std::size_t nbuf = 0;     // |buf|
    std::uint64_t ntotal = 0; // nbuf + child->total_count()
    std::uint64_t nrec = 1;   // 1 + child->records_total()
  };

  // Deque of records with aggregate counts.
  struct RecDeque {
    PDeque<Rec> d;
    std::uint64_t cnt = 0;  // sum ntotal
    std::uint64_t rec = 0;  // sum nrec

    bool empty() const { return d.empty(); }
    std::size_t size() const { return d.size(); }
    const Rec& front() const { return d.front(); }
    const Rec& back() const { return d.back(); }
    void push_front(const Rec& r);
    void push_back(const Rec& r);
    Rec pop_front();
    Rec pop_back();
    static RecDeque concat(const RecDeque& a, const RecDeque& b);
  };

  BlockStore* st_ = nullptr;
  std::size_t b_ = 1;

  Buf F_, L_;
  std::size_t nF_ = 0, nL_ = 0;
  Elem fmn_{}, fmx_{}, lmn_{}, lmx_{};

  RecDeque C_, B_;
  PDeque<RecDeque> D_;
  std::uint64_t sumD_ = 0;  // records across all dirty deques
  std::uint64_t cntD_ = 0;  // elements across all dirty deques
  std::uint64_t recD_ = 0;  // records incl descendants across all dirty deques
};

// Evolving root with its critical records pinned. Each operation runs inside
// a pin scope (freshly allocated payloads stay resident for free), then the
// pin set is resynced: blocks that left the critical set are unpinned
// (paying their write-back), newly critical resident blocks stay, and newly
// critical on-store blocks are loaded by pin().
class CpqaHandle {
 public:
  CpqaHandle(BlockStore& st, std::size_t b);
  ~CpqaHandle();
  CpqaHandle(const CpqaHandle&) = delete;
  CpqaHandle& operator=(const CpqaHandle&) = delete;

  const CpqaPtr& queue() const { return q_; }
  BlockStore& store() const { return *st_; }

  bool empty() const { return q_->empty(); }
  std::uint64_t total_count() const { return q_->total_count(); }
  Elem find_min() const { return q_->find_min(); }
  double phi_tree() const { return q_->phi_tree(); }

  void insert(Elem e);
  Elem delete_min();
  void catenate(const CpqaPtr& q2);  // absorb q2 at the back
  void replace(CpqaPtr q);           // swap in an externally built version

 private:
  void apply(CpqaPtr nq, std::vector<BlockId> fresh);

  BlockStore* st_;
  std::size_t b_;
  CpqaPtr q_;
  std::vector<BlockId> pinned_;
};

}  // namespace emsky
