#include "emsky/emblock.hpp"

namespace emsky {
namespace detail {

BlockNode::~BlockNode() {
  if (!st) return;
  const std::size_t blocks = st->span(elems);
  if (pinned) st->pinned_blocks -= blocks;  // dead data is not written back
  st->blocks_in_use -= blocks;
  st->live.erase(id);
}

}  // namespace detail

BlockStore::BlockStore(std::size_t block_capacity_elems, std::size_t memory_budget_blocks)
    : st_(std::make_shared<detail::StoreState>()) {
  if (block_capacity_elems == 0 || memory_budget_blocks == 0)
    throw PreconditionError("block capacity and memory budget must be positive");
  st_->capacity = block_capacity_elems;
  st_->budget = memory_budget_blocks;
}

std::shared_ptr<detail::BlockNode> BlockStore::alloc_raw(detail::Payload payload,
                                                         std::size_t elems, bool pinned,
                                                         const char* who) {
  auto n = std::make_shared<detail::BlockNode>();
  n->st = st_;
  n->id = st_->next_id++;
  n->elems = elems;
  n->payload = std::move(payload);
  const std::size_t blocks = st_->span(elems);
  if (pinned) {
    if (st_->pinned_blocks + blocks > st_->budget)
      throw PinBudgetError(std::string("pin budget exceeded by ") + who);
    n->pinned = true;
    n->dirty = true;  // exists only in memory until written back
    st_->pinned_blocks += blocks;
    if (st_->scope) st_->scope->push_back(n->id);
  } else {
    st_->io.writes += blocks;
  }
  st_->blocks_in_use += blocks;
  st_->live.emplace(n->id, n.get());
  return n;
}

detail::Payload BlockStore::access_read(BlockId id) {
  detail::BlockNode* n = st_->need(id);
  if (!n->pinned) st_->io.reads += st_->span(n->elems);
  return n->payload;
}

void BlockStore::access_write(BlockId id, detail::Payload payload, std::size_t elems) {
  detail::BlockNode* n = st_->need(id);
  const std::size_t old_blocks = st_->span(n->elems);
  const std::size_t new_blocks = st_->span(elems);
  if (n->pinned) {
    if (st_->pinned_blocks - old_blocks + new_blocks > st_->budget)
      throw PinBudgetError("pin budget exceeded by in-place write");
    st_->pinned_blocks += new_blocks - old_blocks;
    n->dirty = true;
  } else {
    st_->io.writes += new_blocks;
  }
  st_->blocks_in_use += new_blocks - old_blocks;
  n->payload = std::move(payload);
  n->elems = elems;
}

void BlockStore::pin(BlockId id, const char* who) {
  detail::BlockNode* n = st_->need(id);
  if (n->pinned) return;
  const std::size_t blocks = st_->span(n->elems);
  if (st_->pinned_blocks + blocks > st_->budget)
    throw PinBudgetError(std::string("pin budget exceeded by ") + who);
  st_->io.reads += blocks;  // loading it into memory
  n->pinned = true;
  st_->pinned_blocks += blocks;
}

void BlockStore::pin_resident(BlockId id, const char* who) {
  detail::BlockNode* n = st_->need(id);
  if (n->pinned) return;
  const std::size_t blocks = st_->span(n->elems);
  if (st_->pinned_blocks + blocks > st_->budget)
    throw PinBudgetError(std::string("pin budget exceeded by ") + who);
  n->pinned = true;
  st_->pinned_blocks += blocks;
}

void BlockStore::unpin(BlockId id) {
  detail::BlockNode* n = st_->need(id);
  if (!n->pinned) return;
  const std::size_t blocks = st_->span(n->elems);
  n->pinned = false;
  st_->pinned_blocks -= blocks;
  if (n->dirty) {
    st_->io.writes += blocks;  // write-back on eviction
    n->dirty = false;
  }
}

bool BlockStore::is_pinned(BlockId id) const { return st_->need(id)->pinned; }

}  // namespace emsky
