#include "emsky/foursided.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "emsky/geom.hpp"

using namespace emsky;

namespace {

std::vector<Point> pts_of(std::vector<std::pair<std::int64_t, std::int64_t>> xy) {
  std::vector<Point> out;
  for (auto [x, y] : xy) out.push_back({x, y, out.size()});
  std::sort(out.begin(), out.end(), less_x);
  return out;
}

std::vector<Point> random_pts(std::mt19937_64& rng, std::size_t n, std::int64_t range,
                              std::uint64_t id0 = 0) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(range)),
                   static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(range)),
                   id0 + i});
  std::sort(out.begin(), out.end(), less_x);
  return out;
}

BlockStore mkstore(std::size_t cap) { return BlockStore(cap, 1u << 22); }

SkylineAnswer oracle(const std::vector<Point>& pts, std::int64_t x_lo, std::int64_t x_hi,
                     std::int64_t y_lo, std::int64_t y_hi) {
  return skyline_oracle(pts, QueryRect{QueryKind::FourSided, x_lo, x_hi, y_lo, y_hi});
}

QueryRect random_rect(std::mt19937_64& rng, std::int64_t range, int salt) {
  QueryRect q;
  q.x_lo = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(range));
  q.x_hi = q.x_lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(range / 2 + 1));
  q.y_lo = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(range));
  q.y_hi = q.y_lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(range / 2 + 1));
  if (salt % 5 == 0) q.x_lo = NEG_INF;
  if (salt % 7 == 0) q.x_hi = POS_INF;
  if (salt % 6 == 0) q.y_lo = NEG_INF;
  if (salt % 8 == 0) q.y_hi = POS_INF;
  if (salt % 9 == 0) q.x_hi = q.x_lo;  // degenerate vertical slab
  return q;
}

}  // namespace

TEST_CASE("foursided: build validates its input") {
  BlockStore st = mkstore(8);
  std::vector<Point> ok = pts_of({{1, 5}, {2, 3}, {4, 4}});
  CHECK_THROWS_AS((void)FourSided::build_sorted(st, ok, 0.0), PreconditionError);
  CHECK_THROWS_AS((void)FourSided::build_sorted(st, ok, -0.5), PreconditionError);
  CHECK_THROWS_AS((void)FourSided::build_sorted(st, ok, 1.5), PreconditionError);
  std::vector<Point> unsorted{{4, 4, 0}, {2, 3, 1}};
  CHECK_THROWS_AS((void)FourSided::build_sorted(st, unsorted, 0.5), PreconditionError);
  std::vector<Point> dup_yid{{1, 7, 3}, {5, 7, 3}};  // same (y, id)
  CHECK_THROWS_AS((void)FourSided::build_sorted(st, dup_yid, 0.5), PreconditionError);
  auto t = FourSided::build_sorted(st, ok, 0.5);
  CHECK(t.size() == 3);
}

TEST_CASE("foursided: worked example") {
  BlockStore st = mkstore(8);
  auto pts = pts_of({{1, 5}, {2, 3}, {4, 4}, {6, 2}});
  auto t = FourSided::build_sorted(st, pts, 0.5);
  auto a = t.query(1, 6, 3, 4);
  REQUIRE(a.size() == 1);
  CHECK(a[0] == Point{4, 4, 2});
  a = t.query(1, 6, 2, 4);
  REQUIRE(a.size() == 2);
  CHECK(a[0] == Point{4, 4, 2});
  CHECK(a[1] == Point{6, 2, 3});
  CHECK(t.query(1, 6, 6, 9).empty());
  CHECK(t.query(7, 9, NEG_INF, POS_INF).empty());
  CHECK(t.query(NEG_INF, 0, NEG_INF, POS_INF).empty());
  CHECK(t.query(NEG_INF, POS_INF, NEG_INF, POS_INF) == oracle(pts, NEG_INF, POS_INF, NEG_INF, POS_INF));
  CHECK_THROWS_AS((void)t.query(4, 2, 0, 9), PreconditionError);
  CHECK_THROWS_AS((void)t.query(2, 4, 9, 0), PreconditionError);
}

TEST_CASE("foursided: build shapes and substructure placement") {
  std::mt19937_64 rng(1212);
  BlockStore st = mkstore(8);
  auto small = random_pts(rng, 10, 100);
  auto ts = FourSided::build_sorted(st, small, 0.5);
  CHECK(ts.height() == 1);  // a root leaf holds up to 2B points
  auto r = ts.check_structure();
  INFO(r.what);
  CHECK(r.ok);

  auto big = random_pts(rng, 3000, 20000, 100);
  auto tb = FourSided::build_sorted(st, big, 0.5);
  CHECK(tb.height() >= 3);
  CHECK(tb.fan_f() >= 2);
  bool root_seen = false;
  for (const auto& pr : tb.probe_nodes()) {
    if (pr.depth == 0) {
      root_seen = true;
      CHECK(!pr.has_r);
      CHECK(pr.pts.size() == 3000);
    } else {
      CHECK(pr.has_r == (pr.kids > 0));
    }
  }
  CHECK(root_seen);
  r = tb.check_structure();
  INFO(r.what);
  CHECK(r.ok);

  BlockStore st2 = mkstore(8);
  auto te = FourSided::build_sorted(st2, {}, 0.5);
  CHECK(te.size() == 0);
  CHECK(te.query(NEG_INF, POS_INF, NEG_INF, POS_INF).empty());
  CHECK_THROWS_AS(te.erase({1, 1, 0}), PreconditionError);
  te.insert({5, 5, 0});
  CHECK(te.size() == 1);
}

TEST_CASE("foursided: query matches the oracle over random data") {
  std::mt19937_64 rng(20301);
  int salt = 0;
  for (std::size_t cap : {4u, 8u, 32u}) {
    for (std::size_t n : {1u, 2u, 17u, 230u, 1200u}) {
      double eps = (salt % 3 == 0) ? 0.3 : (salt % 3 == 1) ? 0.5 : 1.0;
      BlockStore st = mkstore(cap);
      auto pts = random_pts(rng, n, 4 * static_cast<std::int64_t>(n) + 8);
      auto t = FourSided::build_sorted(st, pts, eps);
      for (int q = 0; q < 120; ++q) {
        QueryRect rect = random_rect(rng, 4 * static_cast<std::int64_t>(n) + 8, ++salt);
        auto got = t.query(rect);
        auto want = skyline_oracle(pts, rect);
        INFO("cap " << cap << " n " << n << " eps " << eps << " q " << q);
        CHECK(got == want);
      }
    }
  }
}

TEST_CASE("foursided: ties in both coordinates") {
  // A lattice with heavy x and y collisions; ids break every tie.
  std::vector<Point> pts;
  for (std::int64_t x = 0; x < 12; ++x)
    for (std::int64_t y = 0; y < 6; ++y) pts.push_back({x / 2, y, static_cast<std::uint64_t>(pts.size())});
  std::sort(pts.begin(), pts.end(), less_x);
  BlockStore st = mkstore(4);
  auto t = FourSided::build_sorted(st, pts, 0.5);
  std::mt19937_64 rng(5);
  for (int q = 0; q < 200; ++q) {
    QueryRect rect = random_rect(rng, 8, q);
    auto got = t.query(rect);
    auto want = skyline_oracle(pts, rect);
    INFO("q " << q);
    CHECK(got == want);
  }
}

TEST_CASE("foursided: updates validate and round trip") {
  std::mt19937_64 rng(77);
  BlockStore st = mkstore(8);
  auto pts = random_pts(rng, 120, 500);
  auto t = FourSided::build_sorted(st, pts, 0.5);
  CHECK_THROWS_AS(t.insert(pts[10]), PreconditionError);
  Point off = pts[10];
  off.y += 1;
  CHECK_THROWS_AS(t.erase(off), PreconditionError);  // y must match exactly
  CHECK_THROWS_AS(t.erase({POS_INF - 1, 0, 9999}), PreconditionError);
  auto before = t.query(NEG_INF, POS_INF, NEG_INF, POS_INF);
  t.insert({501, 501, 9999});
  t.erase({501, 501, 9999});
  CHECK(t.query(NEG_INF, POS_INF, NEG_INF, POS_INF) == before);
  auto r = t.check_structure();
  INFO(r.what);
  CHECK(r.ok);
}

TEST_CASE("foursided: interleaved updates and queries match the oracle") {
  std::mt19937_64 rng(424242);
  for (std::size_t cap : {4u, 16u}) {
    BlockStore st = mkstore(cap);
    auto pts = random_pts(rng, 150, 2000);
    auto t = FourSided::build_sorted(st, pts, 0.5);
    std::vector<Point> ref = pts;
    std::uint64_t next_id = 150;
    for (int op = 0; op < 700; ++op) {
      std::size_t kind = rng() % 8;
      if (kind < 4 || ref.empty()) {
        Point p{static_cast<std::int64_t>(rng() % 2000), static_cast<std::int64_t>(rng() % 2000),
                next_id++};
        bool dup = false;
        for (const Point& q : ref)
          if (cmp_x(q, p) == 0) dup = true;
        if (dup) continue;
        t.insert(p);
        ref.insert(std::upper_bound(ref.begin(), ref.end(), p, less_x), p);
      } else if (kind < 6) {
        std::size_t at = rng() % ref.size();
        t.erase(ref[at]);
        ref.erase(ref.begin() + static_cast<std::ptrdiff_t>(at));
      } else {
        QueryRect rect = random_rect(rng, 2000, op);
        INFO("cap " << cap << " op " << op);
        CHECK(t.query(rect) == skyline_oracle(ref, rect));
      }
      if (op % 100 == 0) {
        auto r = t.check_structure();
        INFO("cap " << cap << " op " << op << ": " << r.what);
        REQUIRE(r.ok);
      }
    }
    CHECK(t.size() == ref.size());
    CHECK(t.rebuilds() >= 2);  // 700 updates vs a threshold of ~n/2
  }
}

TEST_CASE("foursided: erase to empty and regrow") {
  std::mt19937_64 rng(909);
  BlockStore st = mkstore(4);
  auto pts = random_pts(rng, 70, 400);
  auto t = FourSided::build_sorted(st, pts, 1.0);
  std::vector<Point> ref = pts;
  while (!ref.empty()) {
    std::size_t at = rng() % ref.size();
    t.erase(ref[at]);
    ref.erase(ref.begin() + static_cast<std::ptrdiff_t>(at));
    if (ref.size() % 16 == 0) {
      auto r = t.check_structure();
      INFO(r.what);
      REQUIRE(r.ok);
      QueryRect rect{QueryKind::FourSided, NEG_INF, POS_INF, NEG_INF, POS_INF};
      CHECK(t.query(rect) == skyline_oracle(ref, rect));
    }
  }
  CHECK(t.size() == 0);
  CHECK(t.height() == 1);
  for (int i = 0; i < 30; ++i) t.insert({static_cast<std::int64_t>(i * 3), static_cast<std::int64_t>(i % 7), static_cast<std::uint64_t>(1000 + i)});
  auto r = t.check_structure();
  INFO(r.what);
  CHECK(r.ok);
  CHECK(t.size() == 30);
}

TEST_CASE("foursided: destruction releases every pin") {
  BlockStore st = mkstore(8);
  std::mt19937_64 rng(3131);
  auto pts = random_pts(rng, 600, 4000);
  {
    auto t = FourSided::build_sorted(st, pts, 0.5);
    CHECK(st.pinned_blocks() > 0);  // substructures pin their root records
    CHECK(!st.has_pin_scope());
  }
  CHECK(st.pinned_blocks() == 0);
  CHECK(st.blocks_in_use() == 0);
}

TEST_CASE("foursided: transfer ceilings") {
  // Build runs at ~1.8 transfers per input block per level (substructure
  // builds dominate, one level of them per tree level). Queries fit
  // c1 * (n/B)^eps + c2 * k/B + c3; the worst measured c1 share is ~10.4
  // at eps 0.3 (the inner log factor overtakes the tiny power), the worst
  // k coefficient ~2.9 on all-skyline data. Updates amortize to ~5.2 *
  // log2(n/B) with the worst single op being a global rebuild at ~8 * n/B.
  for (std::size_t cap : {16u, 64u}) {
    for (std::size_t n : {4096u, 8192u, 16384u}) {
      std::mt19937_64 rng(n + cap);
      auto pts = random_pts(rng, n, 8 * static_cast<std::int64_t>(n));
      BlockStore st = mkstore(cap);
      IoCounter b0 = st.counters();
      auto t = FourSided::build_sorted(st, pts, 0.5);
      IoCounter delta = st.counters() - b0;
      std::uint64_t blocks = (n + cap - 1) / cap;
      INFO("cap " << cap << " n " << n << " io " << delta.total() << " h " << t.height());
      CHECK(t.height() <= 5);
      CHECK(delta.total() <= 3 * t.height() * blocks + 64);
      std::uint64_t qworst = 0;
      std::uint64_t kworst = 0;
      for (int q = 0; q < 150; ++q) {
        QueryRect rect = random_rect(rng, 8 * static_cast<std::int64_t>(n), q + 1);
        IoCounter q0 = st.counters();
        auto ans = t.query(rect);
        std::uint64_t d = (st.counters() - q0).total();
        if (d > qworst) {
          qworst = d;
          kworst = ans.size();
        }
      }
      const double bound = 8.0 * std::pow(static_cast<double>(n) / static_cast<double>(cap), 0.5) +
                           5.0 * static_cast<double>(kworst) / static_cast<double>(cap) + 64.0;
      INFO("cap " << cap << " n " << n << " qworst " << qworst << " k " << kworst);
      CHECK(static_cast<double>(qworst) <= bound);
    }
  }
  for (double eps : {0.3, 1.0}) {
    const std::size_t n = 16384, cap = 64;
    std::mt19937_64 rng(31 + static_cast<std::size_t>(10 * eps));
    auto pts = random_pts(rng, n, 8 * n);
    BlockStore st = mkstore(cap);
    auto t = FourSided::build_sorted(st, pts, eps);
    CHECK(t.height() <= static_cast<std::size_t>(std::ceil(1.0 / eps)) + 3);
    for (int q = 0; q < 100; ++q) {
      QueryRect rect = random_rect(rng, 8 * n, q + 1);
      IoCounter q0 = st.counters();
      auto ans = t.query(rect);
      const double io = static_cast<double>((st.counters() - q0).total());
      const double bound =
          8.0 * std::pow(static_cast<double>(n) / cap, eps) +
          5.0 * static_cast<double>(ans.size()) / static_cast<double>(cap) + 64.0;
      INFO("eps " << eps << " q " << q << " io " << io << " k " << ans.size());
      CHECK(io <= bound);
    }
  }
  {
    // all-skyline data stresses the output term
    const std::size_t n = 16384, cap = 16;
    std::vector<Point> pts;
    for (std::size_t i = 0; i < n; ++i)
      pts.push_back({static_cast<std::int64_t>(2 * i), static_cast<std::int64_t>(2 * (n - i)), i});
    BlockStore st = mkstore(cap);
    auto t = FourSided::build_sorted(st, pts, 0.5);
    std::mt19937_64 rng(17);
    for (int q = 0; q < 100; ++q) {
      std::int64_t x1 = static_cast<std::int64_t>(rng() % (2 * n));
      std::int64_t x2 = x1 + static_cast<std::int64_t>(rng() % (2 * n));
      IoCounter q0 = st.counters();
      auto ans = t.query(x1, x2, NEG_INF, POS_INF);
      const double io = static_cast<double>((st.counters() - q0).total());
      const double bound = 8.0 * std::pow(static_cast<double>(n) / cap, 0.5) +
                           5.0 * static_cast<double>(ans.size()) / static_cast<double>(cap) + 64.0;
      INFO("q " << q << " io " << io << " k " << ans.size());
      CHECK(io <= bound);
    }
  }
}

TEST_CASE("foursided: updates amortize to a logarithmic transfer cost") {
  const std::size_t n = 4096;
  for (std::size_t cap : {16u, 64u}) {
    std::mt19937_64 rng(3 * n + cap);
    auto pts = random_pts(rng, n, 4 * static_cast<std::int64_t>(n));
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Point& a, const Point& b) { return a.x == b.x; }),
              pts.end());
    BlockStore st = mkstore(cap);
    auto t = FourSided::build_sorted(st, pts, 0.5);
    std::vector<Point> ref = pts;
    std::uint64_t nid = 1u << 20;
    std::uint64_t worst = 0, total = 0;
    const std::size_t OPS = 2 * n;
    for (std::size_t op = 0; op < OPS; ++op) {
      IoCounter b0 = st.counters();
      if (op % 2 == 0) {
        Point p{static_cast<std::int64_t>(rng() % (8 * n)) * 2 + 1,
                static_cast<std::int64_t>(rng() % (4 * n)), nid++};
        t.insert(p);
        ref.insert(std::upper_bound(ref.begin(), ref.end(), p, less_x), p);
      } else {
        std::size_t at = rng() % ref.size();
        t.erase(ref[at]);
        ref.erase(ref.begin() + static_cast<std::ptrdiff_t>(at));
      }
      std::uint64_t d = (st.counters() - b0).total();
      worst = std::max(worst, d);
      total += d;
    }
    CHECK(t.rebuilds() >= 2);  // the run must actually cross global rebuilds
    const double amort = static_cast<double>(total) / static_cast<double>(OPS);
    INFO("cap " << cap << " amort " << amort << " worst " << worst);
    CHECK(amort <= 9.0 * std::log2(static_cast<double>(n) / static_cast<double>(cap)) + 16.0);
    CHECK(worst <= 12 * (n / cap) + 64);
  }
}
