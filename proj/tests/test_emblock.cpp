#include <doctest.h>

#include <vector>

#include "emsky/emblock.hpp"

using namespace emsky;

using Vec = std::vector<int>;

static Vec iota_vec(int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

TEST_SUITE("emblock") {

TEST_CASE("alloc and fetch charge by span") {
  BlockStore st(4, 16);
  auto before = st.counters();
  auto r = st.alloc<Vec>(iota_vec(3), 3, false);
  CHECK((st.counters() - before) == IoCounter{0, 1});

  before = st.counters();
  CHECK(r.fetch().size() == 3);
  CHECK((st.counters() - before) == IoCounter{1, 0});

  // 10 elements over capacity-4 blocks span 3 blocks.
  before = st.counters();
  auto big = st.alloc<Vec>(iota_vec(10), 10, false);
  CHECK((st.counters() - before) == IoCounter{0, 3});
  before = st.counters();
  big.fetch();
  CHECK((st.counters() - before) == IoCounter{3, 0});
  CHECK(st.span(10) == 3);
  CHECK(st.span(0) == 1);

  before = st.counters();
  for (int i = 0; i < 3; ++i) r.fetch();
  CHECK((st.counters() - before) == IoCounter{3, 0});
}

TEST_CASE("pinned payloads are free to touch") {
  BlockStore st(4, 16);
  auto before = st.counters();
  auto r = st.alloc<Vec>(iota_vec(3), 3, true);
  CHECK((st.counters() - before) == IoCounter{0, 0});
  CHECK(r.pinned());
  CHECK(st.pinned_blocks() == 1);

  before = st.counters();
  r.fetch();
  r.peek();
  st.access_read(r.id());
  CHECK((st.counters() - before) == IoCounter{0, 0});

  st.unpin(r.id());
  // Created in memory and never written: unpin pays the write-back.
  CHECK((st.counters() - before) == IoCounter{0, 1});
  CHECK_FALSE(r.pinned());

  before = st.counters();
  r.fetch();
  CHECK((st.counters() - before) == IoCounter{1, 0});
}

TEST_CASE("pin loads once, later unpin of clean payload writes nothing") {
  BlockStore st(4, 16);
  auto r = st.alloc<Vec>(iota_vec(5), 5, false);  // span 2
  auto before = st.counters();
  st.pin(r.id());
  CHECK((st.counters() - before) == IoCounter{2, 0});

  before = st.counters();
  r.fetch();
  r.fetch();
  CHECK((st.counters() - before) == IoCounter{0, 0});

  before = st.counters();
  st.unpin(r.id());  // never dirtied while pinned
  CHECK((st.counters() - before) == IoCounter{0, 0});

  before = st.counters();
  r.fetch();
  CHECK((st.counters() - before) == IoCounter{2, 0});
}

TEST_CASE("pin budget is enforced in blocks") {
  BlockStore st(4, 2);
  auto a = st.alloc<Vec>(iota_vec(2), 2, true);
  auto b = st.alloc<Vec>(iota_vec(2), 2, true);
  CHECK(st.pinned_blocks() == 2);
  CHECK_THROWS_AS(st.alloc<Vec>(iota_vec(1), 1, true, "third"), PinBudgetError);

  auto c = st.alloc<Vec>(iota_vec(1), 1, false);
  CHECK_THROWS_AS(st.pin(c.id()), PinBudgetError);

  st.unpin(b.id());
  CHECK(st.pinned_blocks() == 1);
  st.pin(c.id());
  CHECK(st.pinned_blocks() == 2);

  // A spanning payload must fit as a whole.
  st.unpin(a.id());
  st.unpin(c.id());
  CHECK_THROWS_AS(st.alloc<Vec>(iota_vec(9), 9, true), PinBudgetError);
}

TEST_CASE("in-place write to a pinned payload grows its footprint") {
  BlockStore st(4, 3);
  auto r = st.alloc<Vec>(iota_vec(3), 3, true);
  auto before = st.counters();
  st.access_write(r.id(), std::make_shared<const Vec>(iota_vec(8)), 8);
  CHECK((st.counters() - before) == IoCounter{0, 0});
  CHECK(st.pinned_blocks() == 2);
  CHECK(r.elems() == 8);

  CHECK_THROWS_AS(
      st.access_write(r.id(), std::make_shared<const Vec>(iota_vec(13)), 13),
      PinBudgetError);

  before = st.counters();
  st.unpin(r.id());
  CHECK((st.counters() - before) == IoCounter{0, 2});
}

TEST_CASE("write to an unpinned payload is charged at the new span") {
  BlockStore st(4, 16);
  auto r = st.alloc<Vec>(iota_vec(2), 2, false);
  auto before = st.counters();
  st.access_write(r.id(), std::make_shared<const Vec>(iota_vec(6)), 6);
  CHECK((st.counters() - before) == IoCounter{0, 2});
  CHECK(st.blocks_in_use() == 2);
}

TEST_CASE("unknown ids are rejected") {
  BlockStore st(4, 16);
  CHECK_THROWS_AS(st.access_read(12345), UnknownBlockError);
  CHECK_THROWS_AS(st.pin(12345), UnknownBlockError);
  CHECK_THROWS_AS(st.unpin(12345), UnknownBlockError);
  auto r = st.alloc<Vec>(iota_vec(1), 1, false);
  BlockId id = r.id();
  r = BlockRef<Vec>();
  CHECK_FALSE(st.is_live(id));
  CHECK_THROWS_AS(st.access_read(id), UnknownBlockError);
}

TEST_CASE("dying payloads never write back") {
  BlockStore st(4, 4);
  auto before = st.counters();
  {
    auto r = st.alloc<Vec>(iota_vec(6), 6, true);  // dirty, pinned, span 2
    CHECK(st.pinned_blocks() == 2);
    CHECK(st.blocks_in_use() == 2);
  }
  CHECK(st.pinned_blocks() == 0);
  CHECK(st.blocks_in_use() == 0);
  CHECK(st.payload_count() == 0);
  CHECK((st.counters() - before) == IoCounter{0, 0});
}

TEST_CASE("pin scope unpins what outlives it") {
  BlockStore st(4, 8);
  BlockRef<Vec> survivor;
  auto before = st.counters();
  {
    PinScope sc(st);
    CHECK(sc.primary());
    CHECK(st.has_pin_scope());
    survivor = st.alloc<Vec>(iota_vec(3), 3, true);
    auto doomed = st.alloc<Vec>(iota_vec(2), 2, true);
    CHECK(st.pinned_blocks() == 2);
    // doomed dies before the scope closes: no transfer for it.
  }
  CHECK_FALSE(st.has_pin_scope());
  CHECK_FALSE(survivor.pinned());
  CHECK(st.is_live(survivor.id()));
  CHECK((st.counters() - before) == IoCounter{0, 1});
}

TEST_CASE("nested scopes are passive and take() transfers ownership") {
  BlockStore st(4, 8);
  BlockRef<Vec> a, b;
  {
    PinScope outer(st);
    {
      PinScope inner(st);
      CHECK_FALSE(inner.primary());
      a = st.alloc<Vec>(iota_vec(1), 1, true);
    }
    CHECK(a.pinned());  // inner scope did not own it
    b = st.alloc<Vec>(iota_vec(1), 1, true);
    auto ids = outer.take();
    CHECK(ids.size() == 2);
    CHECK_FALSE(st.has_pin_scope());
  }
  CHECK(a.pinned());
  CHECK(b.pinned());
  st.unpin(a.id());
  st.unpin(b.id());
}

TEST_CASE("pin_resident charges nothing") {
  BlockStore st(4, 8);
  auto r = st.alloc<Vec>(iota_vec(5), 5, false);
  auto before = st.counters();
  st.pin_resident(r.id());
  CHECK((st.counters() - before) == IoCounter{0, 0});
  CHECK(r.pinned());
  st.unpin(r.id());
  CHECK((st.counters() - before) == IoCounter{0, 0});
}

TEST_CASE("manual charges and counter windows") {
  BlockStore st(4, 8);
  st.reset_counters();
  st.charge_reads(5);
  st.charge_writes(2);
  CHECK(st.counters() == IoCounter{5, 2});
  CHECK(st.counters().total() == 7);
  st.reset_counters();
  CHECK(st.counters() == IoCounter{0, 0});
}

TEST_CASE("block sequence chunks appends and scans") {
  BlockStore st(4, 8);
  BlockSeq<int> seq(st);
  auto before = st.counters();
  for (int i = 0; i < 10; ++i) seq.append(i);
  CHECK((st.counters() - before) == IoCounter{0, 2});  // two full chunks flushed
  CHECK(seq.size() == 10);

  before = st.counters();
  std::vector<int> got;
  seq.scan([&](int v) { got.push_back(v); });
  CHECK(got == iota_vec(10));
  CHECK((st.counters() - before) == IoCounter{2, 0});  // tail still buffered

  before = st.counters();
  seq.finish();
  CHECK((st.counters() - before) == IoCounter{0, 1});
  before = st.counters();
  got.clear();
  seq.scan([&](int v) { got.push_back(v); });
  CHECK(got == iota_vec(10));
  CHECK((st.counters() - before) == IoCounter{3, 0});
}

TEST_CASE("store params validated") {
  CHECK_THROWS_AS(BlockStore(0, 4), PreconditionError);
  CHECK_THROWS_AS(BlockStore(4, 0), PreconditionError);
}

}  // TEST_SUITE
