#include "emsky/geom.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace emsky {

bool dominates(const Point& p, const Point& q) {
  if (p.x == q.x && p.y == q.y)
    throw PreconditionError("dominates() requires two distinct points");
  return p.x >= q.x && p.y >= q.y;
}

const char* to_string(QueryKind k) {
  switch (k) {
    case QueryKind::FourSided: return "4-sided";
    case QueryKind::TopOpen: return "top-open";
    case QueryKind::RightOpen: return "right-open";
    case QueryKind::BottomOpen: return "bottom-open";
    case QueryKind::LeftOpen: return "left-open";
    case QueryKind::Dominance: return "dominance";
    case QueryKind::AntiDominance: return "anti-dominance";
    case QueryKind::Contour: return "contour";
  }
  return "?";
}

bool parse_query_kind(const std::string& s, QueryKind& out) {
  static const std::pair<const char*, QueryKind> table[] = {
      {"4-sided", QueryKind::FourSided},       {"top-open", QueryKind::TopOpen},
      {"right-open", QueryKind::RightOpen},    {"bottom-open", QueryKind::BottomOpen},
      {"left-open", QueryKind::LeftOpen},      {"dominance", QueryKind::Dominance},
      {"anti-dominance", QueryKind::AntiDominance}, {"contour", QueryKind::Contour},
  };
  for (const auto& [name, kind] : table)
    if (s == name) {
      out = kind;
      return true;
    }
  return false;
}

bool QueryRect::consistent() const {
  const bool xl = x_lo == NEG_INF, xh = x_hi == POS_INF;
  const bool yl = y_lo == NEG_INF, yh = y_hi == POS_INF;
  switch (kind) {
    case QueryKind::FourSided: return !xl && !xh && !yl && !yh;
    case QueryKind::TopOpen: return !xl && !xh && !yl && yh;
    case QueryKind::RightOpen: return !xl && xh && !yl && !yh;
    case QueryKind::BottomOpen: return !xl && !xh && yl && !yh;
    case QueryKind::LeftOpen: return xl && !xh && !yl && !yh;
    case QueryKind::Dominance: return !xl && xh && !yl && yh;
    case QueryKind::AntiDominance: return xl && !xh && yl && !yh;
    case QueryKind::Contour: return xl && !xh && yl && yh;
  }
  return false;
}

SkylineAnswer skyline_oracle(std::span<const Point> pts, const QueryRect& q) {
  std::vector<Point> in;
  for (const Point& p : pts)
    if (q.contains(p)) in.push_back(p);
  SkylineAnswer out;
  for (const Point& p : in) {
    bool maximal = true;
    for (const Point& r : in) {
      if (r.id == p.id) continue;
      if (dominates_tb(r, p)) {
        maximal = false;
        break;
      }
    }
    if (maximal) out.push_back(p);
  }
  std::sort(out.begin(), out.end(), less_x);
  return out;
}

Point mirror_y(const Point& p) { return {p.x, -p.y, p.id}; }
Point swap_axes(const Point& p) { return {p.y, p.x, p.id}; }

std::vector<Point> mirror_y(std::span<const Point> pts) {
  std::vector<Point> out(pts.begin(), pts.end());
  for (Point& p : out) p.y = -p.y;
  return out;
}

std::vector<Point> swap_axes(std::span<const Point> pts) {
  std::vector<Point> out(pts.begin(), pts.end());
  for (Point& p : out) std::swap(p.x, p.y);
  return out;
}

namespace {

std::int64_t parse_coord(const std::string& tok, std::size_t line, bool allow_inf = true) {
  if (allow_inf) {
    if (tok == "inf") return POS_INF;
    if (tok == "-inf") return NEG_INF;
  }
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw PreconditionError("csv line " + std::to_string(line) + ": bad coordinate '" + tok + "'");
  if (v == POS_INF || v == NEG_INF)
    throw PreconditionError("csv line " + std::to_string(line) + ": coordinate reserved as sentinel");
  return v;
}

std::string coord_str(std::int64_t v) {
  if (v == POS_INF) return "inf";
  if (v == NEG_INF) return "-inf";
  return std::to_string(v);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string points_to_csv(std::span<const Point> pts) {
  std::string out;
  for (const Point& p : pts) {
    out += std::to_string(p.x);
    out += ',';
    out += std::to_string(p.y);
    out += '\n';
  }
  return out;
}

std::vector<Point> points_from_csv(const std::string& text) {
  std::vector<Point> pts;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto toks = split_csv_line(line);
    if (toks.size() != 2)
      throw PreconditionError("csv line " + std::to_string(lineno) + ": expected x,y");
    Point p;
    p.x = parse_coord(toks[0], lineno, false);
    p.y = parse_coord(toks[1], lineno, false);
    p.id = pts.size();
    pts.push_back(p);
  }
  return pts;
}

std::string queries_to_csv(std::span<const QueryRect> qs) {
  std::string out;
  for (const QueryRect& q : qs) {
    out += to_string(q.kind);
    out += ',';
    out += coord_str(q.x_lo);
    out += ',';
    out += coord_str(q.x_hi);
    out += ',';
    out += coord_str(q.y_lo);
    out += ',';
    out += coord_str(q.y_hi);
    out += '\n';
  }
  return out;
}

std::vector<QueryRect> queries_from_csv(const std::string& text) {
  std::vector<QueryRect> qs;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto toks = split_csv_line(line);
    if (toks.size() != 5)
      throw PreconditionError("csv line " + std::to_string(lineno) +
                              ": expected kind,x_lo,x_hi,y_lo,y_hi");
    QueryRect q;
    if (!parse_query_kind(toks[0], q.kind))
      throw PreconditionError("csv line " + std::to_string(lineno) + ": unknown kind '" +
                              toks[0] + "'");
    q.x_lo = parse_coord(toks[1], lineno);
    q.x_hi = parse_coord(toks[2], lineno);
    q.y_lo = parse_coord(toks[3], lineno);
    q.y_hi = parse_coord(toks[4], lineno);
    if (!q.consistent())
      throw PreconditionError("csv line " + std::to_string(lineno) +
                              ": bounds inconsistent with kind " + toks[0]);
    qs.push_back(q);
  }
  return qs;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw PreconditionError("failed writing " + path);
}

}  // namespace emsky
