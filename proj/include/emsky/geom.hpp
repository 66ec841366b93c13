#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "emsky/emblock.hpp"

namespace emsky {

// Coordinate sentinels for unbounded query sides. Real coordinates must stay
// strictly inside (NEG_INF, POS_INF) so mirroring never overflows.
inline constexpr std::int64_t POS_INF = std::numeric_limits<std::int64_t>::max();
inline constexpr std::int64_t NEG_INF = std::numeric_limits<std::int64_t>::min();

struct Point {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::uint64_t id = 0;

  bool operator==(const Point& o) const { return x == o.x && y == o.y && id == o.id; }
};

// Ties between equal coordinate values are broken by id, so every dataset is
// effectively in general position. All ordering inside the structures and the
// oracle goes through these comparators.
inline int cmp_x(const Point& p, const Point& q) {
  if (p.x != q.x) return p.x < q.x ? -1 : 1;
  if (p.id != q.id) return p.id < q.id ? -1 : 1;
  return 0;
}
inline int cmp_y(const Point& p, const Point& q) {
  if (p.y != q.y) return p.y < q.y ? -1 : 1;
  if (p.id != q.id) return p.id < q.id ? -1 : 1;
  return 0;
}
inline bool less_x(const Point& p, const Point& q) { return cmp_x(p, q) < 0; }
inline bool less_y(const Point& p, const Point& q) { return cmp_y(p, q) < 0; }

// p dominates q iff p is at least as far right and at least as high. The two
// arguments must be distinct points.
bool dominates(const Point& p, const Point& q);

// Tie-break-aware variant used internally; p != q by id is enough.
inline bool dominates_tb(const Point& p, const Point& q) {
  return cmp_x(p, q) >= 0 && cmp_y(p, q) >= 0;
}

enum class QueryKind : std::uint8_t {
  FourSided,
  TopOpen,
  RightOpen,
  BottomOpen,
  LeftOpen,
  Dominance,
  AntiDominance,
  Contour,
};

const char* to_string(QueryKind k);
bool parse_query_kind(const std::string& s, QueryKind& out);

struct QueryRect {
  QueryKind kind = QueryKind::FourSided;
  std::int64_t x_lo = NEG_INF;
  std::int64_t x_hi = POS_INF;
  std::int64_t y_lo = NEG_INF;
  std::int64_t y_hi = POS_INF;

  bool contains(const Point& p) const {
    return p.x >= x_lo && p.x <= x_hi && p.y >= y_lo && p.y <= y_hi;
  }
  // Checks that the kind agrees with which sides are unbounded.
  bool consistent() const;
};

// Maximal points of P inside the rectangle, sorted by strictly increasing x
// (hence non-increasing y; strictly decreasing under general position).
using SkylineAnswer = std::vector<Point>;

// Exact reference answer by pairwise dominance testing; quadratic in the
// number of points inside the rectangle.
SkylineAnswer skyline_oracle(std::span<const Point> pts, const QueryRect& q);

Point mirror_y(const Point& p);
Point swap_axes(const Point& p);
std::vector<Point> mirror_y(std::span<const Point> pts);
std::vector<Point> swap_axes(std::span<const Point> pts);

// CSV: points as "x,y" lines (ids assigned by line number), queries as
// "kind,x_lo,x_hi,y_lo,y_hi" with "inf"/"-inf" for unbounded sides.
std::string points_to_csv(std::span<const Point> pts);
std::vector<Point> points_from_csv(const std::string& text);
std::string queries_to_csv(std::span<const QueryRect> qs);
std::vector<QueryRect> queries_from_csv(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace emsky
