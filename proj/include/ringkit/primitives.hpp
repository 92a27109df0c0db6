#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace ringkit {

/// Image-space coordinate: x to the right, y down, in pixels.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
inline Point2 operator*(double s, Point2 a) { return {a.x * s, a.y * s}; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Unit direction for an angle in degrees measured counterclockwise from +x
/// as seen on screen; with y pointing down this means 90 degrees is -y.
inline Point2 direction_from_degrees(double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  return {std::cos(rad), -std::sin(rad)};
}

/// Inverse of direction_from_degrees, normalized to [0, 360).
inline double degrees_from_vector(Point2 v) {
  double deg = std::atan2(-v.y, v.x) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

struct BBox {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void extend(Point2 p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  bool overlaps(const BBox& o, double eps = 0.0) const {
    return min_x <= o.max_x + eps && o.min_x <= max_x + eps && min_y <= o.max_y + eps &&
           o.min_y <= max_y + eps;
  }
  bool empty() const { return min_x > max_x; }
};

inline BBox bounding_box(std::span<const Point2> pts) {
  BBox b;
  for (const auto& p : pts) b.extend(p);
  return b;
}

inline constexpr double kCollinearEps = 1e-9;

/// Sign of the turn a->b->c with a tolerance scaled by the segment lengths.
inline int orientation(Point2 a, Point2 b, Point2 c, double eps = kCollinearEps) {
  const double v = cross(b - a, c - a);
  const double scale = std::max({1.0, norm(b - a) * norm(c - a)});
  if (v > eps * scale) return 1;
  if (v < -eps * scale) return -1;
  return 0;
}

/// True when the open segments cross at a single interior point of both.
/// Touching at endpoints, T-junctions and collinear overlap are not crossings.
inline bool segments_cross(Point2 a, Point2 b, Point2 c, Point2 d, double eps = kCollinearEps) {
  const int o1 = orientation(a, b, c, eps);
  const int o2 = orientation(a, b, d, eps);
  const int o3 = orientation(c, d, a, eps);
  const int o4 = orientation(c, d, b, eps);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

/// Segment i of a polyline; the closing segment is index n-1 when closed.
inline std::size_t segment_count(std::size_t points, bool closed) {
  if (points < 2) return 0;
  return closed ? points : points - 1;
}

/// Ray/segment intersection. Returns the ray parameter t >= 0 (distance when
/// dir is unit) of the first point shared with segment [a, b].
inline std::optional<double> ray_segment_intersection(Point2 origin, Point2 dir, Point2 a,
                                                      Point2 b) {
  const Point2 e = b - a;
  const double denom = cross(dir, e);
  const Point2 w = a - origin;
  if (std::abs(denom) < 1e-14 * std::max(1.0, norm(e))) {
    // Parallel: only a collinear overlap can intersect.
    if (std::abs(cross(w, dir)) > 1e-9 * std::max(1.0, norm(w))) return std::nullopt;
    const double ta = dot(a - origin, dir);
    const double tb = dot(b - origin, dir);
    const double lo = std::min(ta, tb);
    const double hi = std::max(ta, tb);
    if (hi < 0.0) return std::nullopt;
    return std::max(0.0, lo);
  }
  const double t = cross(w, e) / denom;
  const double u = cross(w, dir) / denom;
  if (t < 0.0 || u < -1e-12 || u > 1.0 + 1e-12) return std::nullopt;
  return t;
}

/// Signed shoelace area; positive for counterclockwise in a y-up frame.
inline double signed_area(std::span<const Point2> pts) {
  const std::size_t n = pts.size();
  if (n < 3) return 0.0;
  // Shift to the first vertex to reduce cancellation on large coordinates.
  const Point2 o = pts[0];
  double acc = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) acc += cross(pts[i] - o, pts[i + 1] - o);
  return 0.5 * acc;
}

inline double polyline_length(std::span<const Point2> pts, bool closed) {
  const std::size_t n = pts.size();
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) len += distance(pts[i], pts[i + 1]);
  if (closed && n > 1) len += distance(pts[n - 1], pts[0]);
  return len;
}

/// Area centroid from polygon first moments. Falls back to the vertex mean
/// when the polygon has no area.
inline Point2 polygon_centroid(std::span<const Point2> pts) {
  const std::size_t n = pts.size();
  if (n == 0) return {};
  const Point2 o = pts[0];
  double a2 = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = pts[i] - o;
    const Point2 q = pts[(i + 1) % n] - o;
    const double c = cross(p, q);
    a2 += c;
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  if (std::abs(a2) < 1e-300) {
    Point2 m{};
    for (const auto& p : pts) m = m + p;
    return m * (1.0 / static_cast<double>(n));
  }
  return {o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2)};
}

/// Even-odd point-in-polygon test (crossing number).
inline bool point_in_polygon(Point2 p, std::span<const Point2> poly) {
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = poly[i];
    const Point2 b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

inline double point_polyline_distance(Point2 p, std::span<const Point2> pts, bool closed) {
  const std::size_t n = pts.size();
  if (n == 0) return std::numeric_limits<double>::infinity();
  if (n == 1) return distance(p, pts[0]);
  double best = std::numeric_limits<double>::infinity();
  const std::size_t m = segment_count(n, closed);
  for (std::size_t i = 0; i < m; ++i) {
    best = std::min(best, point_segment_distance(p, pts[i], pts[(i + 1) % n]));
  }
  return best;
}

/// Checks every pair of non-adjacent segments for a proper crossing.
inline bool polyline_self_intersects(std::span<const Point2> pts, bool closed) {
  const std::size_t n = pts.size();
  const std::size_t m = segment_count(n, closed);
  if (m < 3) return false;
  struct Seg {
    std::size_t idx;
    double min_x, max_x;
  };
  std::vector<Seg> segs;
  segs.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Point2 a = pts[i];
    const Point2 b = pts[(i + 1) % n];
    segs.push_back({i, std::min(a.x, b.x), std::max(a.x, b.x)});
  }
  std::sort(segs.begin(), segs.end(), [](const Seg& l, const Seg& r) { return l.min_x < r.min_x; });
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const std::size_t i = segs[s].idx;
    const Point2 a = pts[i];
    const Point2 b = pts[(i + 1) % n];
    for (std::size_t t = s + 1; t < segs.size() && segs[t].min_x <= segs[s].max_x; ++t) {
      const std::size_t j = segs[t].idx;
      const std::size_t lo = std::min(i, j);
      const std::size_t hi = std::max(i, j);
      if (hi - lo == 1) continue;
      if (closed && lo == 0 && hi == m - 1) continue;
      if (segments_cross(a, b, pts[j], pts[(j + 1) % n])) return true;
    }
  }
  return false;
}

/// True when any segment of a crosses any segment of b (touching allowed).
inline bool polylines_cross(std::span<const Point2> a, bool a_closed, std::span<const Point2> b,
                            bool b_closed) {
  if (a.size() < 2 || b.size() < 2) return false;
  if (!bounding_box(a).overlaps(bounding_box(b))) return false;
  struct Seg {
    Point2 p, q;
    double min_x, max_x;
    int owner;
  };
  std::vector<Seg> segs;
  auto add = [&segs](std::span<const Point2> pts, bool closed, int owner) {
    const std::size_t m = segment_count(pts.size(), closed);
    for (std::size_t i = 0; i < m; ++i) {
      const Point2 u = pts[i];
      const Point2 v = pts[(i + 1) % pts.size()];
      segs.push_back({u, v, std::min(u.x, v.x), std::max(u.x, v.x), owner});
    }
  };
  add(a, a_closed, 0);
  add(b, b_closed, 1);
  std::sort(segs.begin(), segs.end(), [](const Seg& l, const Seg& r) { return l.min_x < r.min_x; });
  // x-sweep: each segment is tested against the still-active segments of the
  // other polyline.
  std::vector<const Seg*> active[2];
  for (const auto& s : segs) {
    for (auto& list : active) {
      std::erase_if(list, [&](const Seg* o) { return o->max_x < s.min_x; });
    }
    const double s_lo = std::min(s.p.y, s.q.y);
    const double s_hi = std::max(s.p.y, s.q.y);
    for (const Seg* o : active[1 - s.owner]) {
      if (std::max(o->p.y, o->q.y) < s_lo || std::min(o->p.y, o->q.y) > s_hi) continue;
      if (segments_cross(s.p, s.q, o->p, o->q)) return true;
    }
    active[s.owner].push_back(&s);
  }
  return false;
}

}  // namespace ringkit
