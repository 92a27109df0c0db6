#pragma once

// Ring widths along a radial ray, and agreement statistics between two width
// series.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "core.hpp"
#include "error.hpp"
#include "primitives.hpp"

namespace ringkit {

struct RaySpec {
  std::optional<Point2> origin;      // pith when empty
  double angle = 0.0;                // degrees, CCW as displayed, [0, 360)
  std::optional<double> max_length;  // px; unbounded when empty

  friend bool operator==(const RaySpec&, const RaySpec&) = default;
};

enum class Direction { North, South, East, West };

/// North is up on screen (-y).
constexpr double direction_angle(Direction d) {
  switch (d) {
    case Direction::North: return 90.0;
    case Direction::South: return 270.0;
    case Direction::East: return 0.0;
    case Direction::West: return 180.0;
  }
  return 0.0;
}

struct RayHit {
  std::size_t ring_index = 0;
  double distance = 0.0;  // mm from the origin
  Point2 point;           // image px

  friend bool operator==(const RayHit&, const RayHit&) = default;
};

struct RingWidth {
  std::size_t ring_index = 0;
  double width = 0.0;  // mm

  friend bool operator==(const RingWidth&, const RingWidth&) = default;
};

struct RaySeries {
  RaySpec ray;
  Point2 origin;  // resolved origin, px
  std::vector<RayHit> hits;
  std::vector<RingWidth> widths;
  std::vector<std::size_t> skipped;

  std::vector<double> width_values() const {
    std::vector<double> out;
    out.reserve(widths.size());
    for (const auto& w : widths) out.push_back(w.width);
    return out;
  }
};

/// Nearest intersection of a ray with a polyline, as a distance in px.
inline std::optional<double> nearest_ray_hit(Point2 origin, Point2 dir, const RingBoundary& b) {
  std::optional<double> best;
  const std::size_t n = b.points.size();
  const std::size_t m = segment_count(n, b.closed);
  for (std::size_t i = 0; i < m; ++i) {
    const auto t = ray_segment_intersection(origin, dir, b.points[i], b.points[(i + 1) % n]);
    if (t && (!best || *t < *best)) best = t;
  }
  return best;
}

/// Widths between consecutive ring crossings of one ray. For each annual
/// boundary the crossing nearest the origin is used; boundaries the ray misses
/// (or whose nearest crossing is not beyond the previous one) are skipped
/// rather than given a zero width.
inline RaySeries measure_ray(const AnnotationDocument& doc, const RaySpec& ray) {
  if (!doc.scale) throw Error(ErrorCode::MissingScale, "ray measurement needs a pixel-to-mm scale");
  if (!ray.origin && !doc.pith) throw Error(ErrorCode::MissingPith, "ray origin defaults to the pith, which is not set");
  if (!(ray.angle >= 0.0 && ray.angle < 360.0)) {
    throw Error(ErrorCode::InvalidArgument, "ray angle must be in [0, 360)");
  }
  RaySeries s;
  s.ray = ray;
  s.origin = ray.origin ? *ray.origin : doc.pith->center;
  const Point2 dir = direction_from_degrees(ray.angle);

  // Open annual polylines count as rings for measurement purposes.
  std::vector<const RingBoundary*> rings;
  for (const auto& sh : doc.shapes) {
    if (sh.kind == BoundaryKind::Annual) rings.push_back(&sh);
  }

  double last_px = 0.0;
  double last_mm = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < rings.size(); ++i) {
    const auto t = nearest_ray_hit(s.origin, dir, *rings[i]);
    const bool in_range = t && (!ray.max_length || *t <= *ray.max_length);
    if (!in_range || (any && !(*t > last_px))) {
      s.skipped.push_back(i);
      continue;
    }
    const double mm = doc.scale->to_mm(*t);
    s.hits.push_back({i, mm, s.origin + dir * *t});
    s.widths.push_back({i, mm - last_mm});
    last_px = *t;
    last_mm = mm;
    any = true;
  }
  return s;
}

struct SeriesComparison {
  std::size_t n = 0;
  double pearson_r = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double rmse = 0.0;
};

/// Pearson correlation, least-squares fit of b on a, and RMSE of a - b.
inline SeriesComparison compare_series(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "series have different lengths");
  if (a.size() < 2) throw Error(ErrorCode::LengthMismatch, "need at least two paired observations");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) throw Error(ErrorCode::InvalidArgument, "non-finite width");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0;
  double sbb = 0.0;
  double sab = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
    sq += (a[i] - b[i]) * (a[i] - b[i]);
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw Error(ErrorCode::DegenerateVariance, "a series is constant; correlation is undefined");
  }
  SeriesComparison c;
  c.n = a.size();
  c.pearson_r = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
  c.slope = sab / saa;
  c.intercept = mb - c.slope * ma;
  c.rmse = std::sqrt(sq / n);
  return c;
}

}  // namespace ringkit
