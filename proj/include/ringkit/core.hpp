#pragma once

// Annotation data model: ring boundaries, pith, scale and the per-image
// document that detection, metrics, evaluation and I/O all share.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "primitives.hpp"

namespace ringkit {

enum class ScaleSource { ManualTwoPoints, Metadata };

struct ScaleCalibration {
  double pixels_per_mm = 1.0;
  ScaleSource source = ScaleSource::Metadata;

  /// Scale from two clicked points a known number of millimetres apart.
  static ScaleCalibration from_two_points(Point2 a, Point2 b, double mm) {
    const double px = distance(a, b);
    if (!(mm > 0.0) || !(px > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "two-point calibration needs distinct points and mm > 0");
    }
    return {px / mm, ScaleSource::ManualTwoPoints};
  }

  double to_mm(double px) const { return px / pixels_per_mm; }
  double to_mm2(double px2) const { return px2 / (pixels_per_mm * pixels_per_mm); }

  friend bool operator==(const ScaleCalibration&, const ScaleCalibration&) = default;
};

enum class PithMethod { Manual, ForegroundCentroid };

struct Pith {
  Point2 center;
  PithMethod method = PithMethod::Manual;

  friend bool operator==(const Pith&, const Pith&) = default;
};

enum class BoundaryKind { Annual, EarlywoodLatewood, Defect, RegionOfInterest };

inline constexpr std::size_t kDefaultNodeBudget = 360;

struct RingBoundary {
  std::string id;
  std::string label;
  std::vector<Point2> points;
  bool closed = true;
  BoundaryKind kind = BoundaryKind::Annual;
  std::optional<int> year_label;
  std::size_t node_budget = kDefaultNodeBudget;
  /// Unrecognized per-shape keys from the annotation file, as raw JSON text.
  std::map<std::string, std::string> extras;

  bool is_annual_ring() const { return kind == BoundaryKind::Annual && closed; }
  double enclosed_area() const { return std::abs(signed_area(points)); }

  friend bool operator==(const RingBoundary&, const RingBoundary&) = default;
};

struct ImageSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct AnnotationDocument {
  std::string image_path;
  ImageSize image_size;
  std::optional<ScaleCalibration> scale;
  std::optional<Pith> pith;
  std::optional<int> harvest_year;
  std::vector<RingBoundary> shapes;
  std::map<std::string, std::string> provenance;
  /// Unrecognized top-level keys from the annotation file, as raw JSON text.
  std::map<std::string, std::string> extras;

  /// Indices into shapes of the closed annual boundaries, in stored order.
  std::vector<std::size_t> annual_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      if (shapes[i].is_annual_ring()) out.push_back(i);
    }
    return out;
  }

  std::vector<const RingBoundary*> annual_rings() const {
    std::vector<const RingBoundary*> out;
    for (const auto& s : shapes) {
      if (s.is_annual_ring()) out.push_back(&s);
    }
    return out;
  }

  std::vector<const RingBoundary*> shapes_of_kind(BoundaryKind kind) const {
    std::vector<const RingBoundary*> out;
    for (const auto& s : shapes) {
      if (s.kind == kind) out.push_back(&s);
    }
    return out;
  }

  friend bool operator==(const AnnotationDocument&, const AnnotationDocument&) = default;
};

// ---------------------------------------------------------------------------
// Resampling

/// Resamples a polyline to n points equally spaced by arc length. Closed
/// boundaries keep point 0 and spread n points over the full loop; open ones
/// keep both end points.
inline RingBoundary resample_boundary(const RingBoundary& b, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "node count must be positive");
  if (b.points.size() < 2) {
    throw Error(ErrorCode::DegenerateBoundary, "boundary '" + b.id + "' has fewer than 2 points");
  }
  const auto& src = b.points;
  const std::size_t m = segment_count(src.size(), b.closed);
  std::vector<double> cumulative(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    cumulative[i + 1] = cumulative[i] + distance(src[i], src[(i + 1) % src.size()]);
  }
  const double total = cumulative.back();
  if (!(total > 0.0)) {
    throw Error(ErrorCode::DegenerateBoundary, "boundary '" + b.id + "' has zero length");
  }

  RingBoundary out = b;
  out.points.clear();
  out.points.reserve(n);
  out.node_budget = n;
  const double step = b.closed ? total / static_cast<double>(n)
                               : (n > 1 ? total / static_cast<double>(n - 1) : 0.0);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!b.closed && k + 1 == n) {
      out.points.push_back(src.back());
      break;
    }
    const double s = step * static_cast<double>(k);
    while (seg + 1 < m && cumulative[seg + 1] <= s) ++seg;
    const double seg_len = cumulative[seg + 1] - cumulative[seg];
    const double t = seg_len > 0.0 ? (s - cumulative[seg]) / seg_len : 0.0;
    const Point2 a = src[seg];
    const Point2 c = src[(seg + 1) % src.size()];
    out.points.push_back(a + (c - a) * std::clamp(t, 0.0, 1.0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ordering

/// Sorts the closed annual boundaries pith-outward by enclosed area and
/// assigns consecutive year labels from the harvest year when one is known.
/// Annual rings come first in the result; every other shape keeps its
/// relative order behind them.
inline AnnotationDocument sort_rings(const AnnotationDocument& doc) {
  std::vector<RingBoundary> annual;
  std::vector<RingBoundary> others;
  for (const auto& s : doc.shapes) {
    (s.is_annual_ring() ? annual : others).push_back(s);
  }

  if (doc.pith) {
    for (const auto& r : annual) {
      if (!point_in_polygon(doc.pith->center, r.points)) {
        throw Error(ErrorCode::PithOutsideRing, "ring '" + r.id + "' does not contain the pith");
      }
    }
  }

  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(annual.size());
  for (std::size_t i = 0; i < annual.size(); ++i) order.emplace_back(annual[i].enclosed_area(), i);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& l, const auto& r) { return l.first < r.first; });

  std::vector<RingBoundary> sorted;
  sorted.reserve(annual.size());
  for (const auto& [area, idx] : order) sorted.push_back(std::move(annual[idx]));

  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (polylines_cross(sorted[i].points, true, sorted[j].points, true)) {
        throw Error(ErrorCode::CrossingBoundaries,
                    "rings '" + sorted[i].id + "' and '" + sorted[j].id + "' cross");
      }
    }
    if (i > 0 && !(order[i].first > order[i - 1].first)) {
      throw Error(ErrorCode::CrossingBoundaries, "rings '" + sorted[i - 1].id + "' and '" +
                                                     sorted[i].id + "' enclose the same area");
    }
  }

  if (doc.harvest_year) {
    const int n = static_cast<int>(sorted.size());
    for (int i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)].year_label = *doc.harvest_year - (n - 1 - i);
  }

  AnnotationDocument out = doc;
  out.shapes = std::move(sorted);
  out.shapes.insert(out.shapes.end(), std::make_move_iterator(others.begin()),
                    std::make_move_iterator(others.end()));
  return out;
}

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  TooFewPoints,
  NonFinitePoint,
  PointOutsideImage,
  SelfIntersection,
  PithOutsideRing,
  CrossingBoundaries,
  OrderViolation,
  YearLabelMismatch,
  DuplicateId,
};

constexpr std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::TooFewPoints: return "TooFewPoints";
    case ViolationKind::NonFinitePoint: return "NonFinitePoint";
    case ViolationKind::PointOutsideImage: return "PointOutsideImage";
    case ViolationKind::SelfIntersection: return "SelfIntersection";
    case ViolationKind::PithOutsideRing: return "PithOutsideRing";
    case ViolationKind::CrossingBoundaries: return "CrossingBoundaries";
    case ViolationKind::OrderViolation: return "OrderViolation";
    case ViolationKind::YearLabelMismatch: return "YearLabelMismatch";
    case ViolationKind::DuplicateId: return "DuplicateId";
  }
  return "Unknown";
}

struct Violation {
  ViolationKind kind;
  std::string shape_id;
  std::string other_id;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Lists every invariant violation in the document; empty when well-formed.
inline std::vector<Violation> validate(const AnnotationDocument& doc) {
  std::vector<Violation> out;

  std::map<std::string, int> seen;
  for (const auto& s : doc.shapes) {
    if (++seen[s.id] == 2) out.push_back({ViolationKind::DuplicateId, s.id, {}});
  }

  const bool known_extent = doc.image_size.width > 0 && doc.image_size.height > 0;
  std::vector<bool> usable(doc.shapes.size(), true);
  for (std::size_t i = 0; i < doc.shapes.size(); ++i) {
    const auto& s = doc.shapes[i];
    const std::size_t min_points = s.closed ? 3 : 2;
    if (s.points.size() < min_points) {
      out.push_back({ViolationKind::TooFewPoints, s.id, {}});
      usable[i] = false;
      continue;
    }
    bool finite = true;
    bool inside = true;
    for (const auto& p : s.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) finite = false;
      if (known_extent && (p.x < 0.0 || p.y < 0.0 || p.x > doc.image_size.width ||
                           p.y > doc.image_size.height))
        inside = false;
    }
    if (!finite) {
      out.push_back({ViolationKind::NonFinitePoint, s.id, {}});
      usable[i] = false;
      continue;
    }
    if (!inside) out.push_back({ViolationKind::PointOutsideImage, s.id, {}});
    if (s.closed && polyline_self_intersects(s.points, true)) {
      out.push_back({ViolationKind::SelfIntersection, s.id, {}});
    }
  }

  std::vector<std::size_t> annual;
  for (std::size_t i = 0; i < doc.shapes.size(); ++i) {
    if (usable[i] && doc.shapes[i].is_annual_ring()) annual.push_back(i);
  }

  if (doc.pith) {
    for (std::size_t i : annual) {
      if (!point_in_polygon(doc.pith->center, doc.shapes[i].points)) {
        out.push_back({ViolationKind::PithOutsideRing, doc.shapes[i].id, {}});
      }
    }
  }

  for (std::size_t a = 0; a < annual.size(); ++a) {
    for (std::size_t b = a + 1; b < annual.size(); ++b) {
      const auto& ra = doc.shapes[annual[a]];
      const auto& rb = doc.shapes[annual[b]];
      if (polylines_cross(ra.points, true, rb.points, true)) {
        out.push_back({ViolationKind::CrossingBoundaries, ra.id, rb.id});
      }
    }
  }

  for (std::size_t k = 1; k < annual.size(); ++k) {
    const auto& prev = doc.shapes[annual[k - 1]];
    const auto& cur = doc.shapes[annual[k]];
    if (!(cur.enclosed_area() > prev.enclosed_area())) {
      out.push_back({ViolationKind::OrderViolation, cur.id, prev.id});
    }
  }

  // Labels, where present, must step down by one per ring going inward.
  for (std::size_t k = 1; k < annual.size(); ++k) {
    const auto& prev = doc.shapes[annual[k - 1]];
    const auto& cur = doc.shapes[annual[k]];
    if (prev.year_label && cur.year_label && *cur.year_label != *prev.year_label + 1) {
      out.push_back({ViolationKind::YearLabelMismatch, cur.id, prev.id});
    }
  }
  if (doc.harvest_year && !annual.empty()) {
    const auto& outer = doc.shapes[annual.back()];
    if (outer.year_label && *outer.year_label != *doc.harvest_year) {
      out.push_back({ViolationKind::YearLabelMismatch, outer.id, {}});
    }
  }
  return out;
}

}  // namespace ringkit
