#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace emsky {

using BlockId = std::uint64_t;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownBlockError : Error {
  using Error::Error;
};
struct PinBudgetError : Error {
  using Error::Error;
};
struct EmptyQueueError : Error {
  using Error::Error;
};
struct PreconditionError : Error {
  using Error::Error;
};
struct InternalError : Error {
  using Error::Error;
};

#define EMSKY_REQUIRE(cond, msg) \
  do {                           \
    if (!(cond)) throw ::emsky::InternalError(std::string("invariant violated: ") + (msg)); \
  } while (0)

struct IoCounter {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;

  std::uint64_t total() const { return reads + writes; }
  IoCounter operator-(const IoCounter& o) const { return {reads - o.reads, writes - o.writes}; }
  bool operator==(const IoCounter& o) const { return reads == o.reads && writes == o.writes; }
};

class BlockStore;

namespace detail {

using Payload = std::shared_ptr<const void>;

struct StoreState;

// One logical payload (a record buffer, a tree node, ...) occupying
// ceil(elems / block_capacity) consecutive blocks.
struct BlockNode {
  std::shared_ptr<StoreState> st;
  BlockId id = 0;
  std::size_t elems = 0;
  Payload payload;
  bool pinned = false;
  bool dirty = false;  // created or mutated in memory, never written back

  ~BlockNode();
};

struct StoreState {
  std::size_t capacity = 0;       // elements per block
  std::size_t budget = 0;         // max pinned blocks
  IoCounter io;
  std::uint64_t next_id = 1;
  std::unordered_map<BlockId, BlockNode*> live;
  std::uint64_t blocks_in_use = 0;  // sum of ceil(elems/capacity) over live payloads
  std::uint64_t pinned_blocks = 0;
  std::vector<BlockId>* scope = nullptr;  // active pin scope, if any

  std::size_t span(std::size_t elems) const {
    return elems == 0 ? 1 : (elems + capacity - 1) / capacity;
  }
  BlockNode* find(BlockId id) const {
    auto it = live.find(id);
    return it == live.end() ? nullptr : it->second;
  }
  BlockNode* need(BlockId id) const {
    BlockNode* n = find(id);
    if (!n) throw UnknownBlockError("unknown block id " + std::to_string(id));
    return n;
  }
};

}  // namespace detail

// Shared handle to one stored payload. Copies share the payload; the payload
// is dropped from the store when the last handle dies (a pinned payload dying
// this way just leaves the pin set, with no transfer charged: dead data is
// never written back).
template <class T>
class BlockRef {
 public:
  BlockRef() = default;

  explicit operator bool() const { return static_cast<bool>(n_); }
  BlockId id() const { return n_ ? n_->id : 0; }
  std::size_t elems() const { return n_ ? n_->elems : 0; }

  // Counted access: ceil(elems/capacity) reads unless the payload is pinned.
  const T& fetch() const {
    auto* n = node();
    if (!n->pinned) n->st->io.reads += n->st->span(n->elems);
    return *static_cast<const T*>(n->payload.get());
  }

  // Uncounted access for diagnostics and invariant checks only.
  const T& peek() const { return *static_cast<const T*>(node()->payload.get()); }

  bool pinned() const { return node()->pinned; }

 private:
  friend class ::emsky::BlockStore;
  explicit BlockRef(std::shared_ptr<detail::BlockNode> n) : n_(std::move(n)) {}
  detail::BlockNode* node() const {
    if (!n_) throw UnknownBlockError("null block ref");
    return n_.get();
  }

  std::shared_ptr<detail::BlockNode> n_;
};

// Simulated external memory. Payloads live in an in-process map keyed by
// block id; an access to an unpinned payload of s elements costs
// ceil(s / block_capacity) transfers on the matching counter, and accesses to
// pinned payloads are free. Pinning an unpinned payload loads it (counted as
// reads); unpinning a payload that was only ever mutated in memory writes it
// back (counted as writes). A store and every structure built on it form one
// single-threaded unit.
class BlockStore {
 public:
  BlockStore(std::size_t block_capacity_elems, std::size_t memory_budget_blocks);

  std::size_t block_capacity() const { return st_->capacity; }
  std::size_t memory_budget() const { return st_->budget; }

  template <class T>
  BlockRef<T> alloc(std::shared_ptr<const T> payload, std::size_t elems, bool pinned,
                    const char* who = "") {
    return BlockRef<T>(alloc_raw(std::static_pointer_cast<const void>(std::move(payload)),
                                 elems, pinned, who));
  }
  template <class T>
  BlockRef<T> alloc(T payload, std::size_t elems, bool pinned, const char* who = "") {
    return alloc<T>(std::make_shared<const T>(std::move(payload)), elems, pinned, who);
  }

  // Spec-level id-based interface.
  detail::Payload access_read(BlockId id);
  void access_write(BlockId id, detail::Payload payload, std::size_t elems);
  void pin(BlockId id, const char* who = "");           // loads if not resident
  void pin_resident(BlockId id, const char* who = "");  // caller holds a loaded copy
  void unpin(BlockId id);
  bool is_pinned(BlockId id) const;
  bool is_live(BlockId id) const { return st_->find(id) != nullptr; }

  IoCounter counters() const { return st_->io; }
  void reset_counters() { st_->io = IoCounter{}; }
  // Direct charge for streamed working sets (sweep stacks and the like) whose
  // spill traffic is modeled rather than materialized block by block.
  void charge_reads(std::uint64_t blocks) { st_->io.reads += blocks; }
  void charge_writes(std::uint64_t blocks) { st_->io.writes += blocks; }

  std::uint64_t blocks_in_use() const { return st_->blocks_in_use; }
  std::size_t payload_count() const { return st_->live.size(); }
  std::uint64_t pinned_blocks() const { return st_->pinned_blocks; }
  std::size_t span(std::size_t elems) const { return st_->span(elems); }

  bool has_pin_scope() const { return st_->scope != nullptr; }

  detail::StoreState& state() { return *st_; }

 private:
  friend class PinScope;
  std::shared_ptr<detail::BlockNode> alloc_raw(detail::Payload payload, std::size_t elems,
                                               bool pinned, const char* who);

  std::shared_ptr<detail::StoreState> st_;
};

// Collects the ids of payloads allocated pinned while the scope is active.
// On destruction every recorded id that is still live and still pinned gets
// unpinned (paying its write-back); take() hands the list to the caller
// instead, for code that promotes some of the new payloads to longer pins.
class PinScope {
 public:
  explicit PinScope(BlockStore& s) : store_(&s) {
    if (!s.st_->scope) {
      s.st_->scope = &ids_;
      primary_ = true;
    }
  }
  PinScope(const PinScope&) = delete;
  PinScope& operator=(const PinScope&) = delete;
  ~PinScope() {
    if (!primary_) return;
    store_->st_->scope = nullptr;
    for (BlockId id : ids_)
      if (store_->is_live(id) && store_->is_pinned(id)) store_->unpin(id);
  }

  bool primary() const { return primary_; }
  std::vector<BlockId> take() {
    if (primary_) store_->st_->scope = nullptr;
    primary_ = false;
    return std::move(ids_);
  }

 private:
  BlockStore* store_;
  std::vector<BlockId> ids_;
  bool primary_ = false;
};

// Block-chunked sequence of trivially copyable values with counted traffic:
// one write per flushed chunk on append, one read per chunk on scan.
template <class T>
class BlockSeq {
 public:
  BlockSeq(BlockStore& s, const char* who = "seq") : store_(&s), who_(who) {}

  void append(const T& v) {
    buf_.push_back(v);
    ++size_;
    if (buf_.size() == store_->block_capacity()) flush();
  }
  void finish() {
    if (!buf_.empty()) flush();
  }

  std::size_t size() const { return size_; }

  template <class F>
  void scan(F&& f) const {
    for (const auto& ref : chunks_) {
      const auto& v = ref.fetch();
      for (const T& x : v) f(x);
    }
    for (const T& x : buf_) f(x);  // unflushed tail, still in memory
  }

 private:
  void flush() {
    const std::size_t n = buf_.size();
    chunks_.push_back(store_->alloc<std::vector<T>>(std::move(buf_), n, false, who_));
    buf_ = {};
  }

  BlockStore* store_;
  const char* who_;
  std::vector<T> buf_;
  std::vector<BlockRef<std::vector<T>>> chunks_;
  std::size_t size_ = 0;
};

}  // namespace emsky
