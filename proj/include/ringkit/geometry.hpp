#pragma once

// Ring metrics computed from boundary polylines: enclosed and annulus areas,
// perimeter, equivalent ring width, circle similarity, eccentricity,
// earlywood/latewood decomposition and defect exclusion.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "clipping.hpp"
#include "core.hpp"
#include "error.hpp"
#include "primitives.hpp"

namespace ringkit {

/// Area, perimeter and area centroid of a closed polyline, in pixel units.
struct PolygonStats {
  double area = 0.0;
  double perimeter = 0.0;
  Point2 centroid;
};

inline PolygonStats polygon_area_perimeter(std::span<const Point2> points) {
  if (points.size() < 3) {
    throw Error(ErrorCode::DegeneratePolygon, "polygon needs at least 3 points");
  }
  PolygonStats s;
  s.area = std::abs(signed_area(points));
  if (s.area < 1e-12) throw Error(ErrorCode::DegeneratePolygon, "polygon area is zero");
  s.perimeter = polyline_length(points, true);
  s.centroid = polygon_centroid(points);
  return s;
}

struct RingArea {
  double cumulative = 0.0;
  double annulus = 0.0;
};

/// Running sums of annulus areas. cumulative[i] == cumulative[i-1] + annulus[i]
/// holds exactly for the returned values.
inline std::vector<RingArea> cumulative_from_annuli(std::span<const double> annulus) {
  std::vector<RingArea> out;
  out.reserve(annulus.size());
  double running = 0.0;
  for (double a : annulus) {
    running += a;
    out.push_back({running, a});
  }
  return out;
}

namespace detail {

inline const ScaleCalibration& require_scale(const AnnotationDocument& doc) {
  if (!doc.scale) throw Error(ErrorCode::MissingScale, "document has no pixel-to-mm scale");
  return *doc.scale;
}

inline const RingBoundary& annual_ring(const AnnotationDocument& doc, std::size_t i) {
  const auto rings = doc.annual_rings();
  if (i >= rings.size()) {
    throw Error(ErrorCode::InvalidArgument, "ring index " + std::to_string(i) + " out of range");
  }
  return *rings[i];
}

}  // namespace detail

/// Enclosed and annulus areas of the annual rings, pith outward, in mm².
/// Expects a document already ordered by sort_rings.
inline std::vector<RingArea> enclosed_areas(const AnnotationDocument& doc) {
  const auto& scale = detail::require_scale(doc);
  const auto rings = doc.annual_rings();
  std::vector<double> annulus;
  annulus.reserve(rings.size());
  double prev = 0.0;
  for (const auto* r : rings) {
    const double cum = scale.to_mm2(polygon_area_perimeter(r->points).area);
    annulus.push_back(cum - prev);
    prev = cum;
  }
  return cumulative_from_annuli(annulus);
}

/// Radius difference of the circles having the two cumulative areas.
inline double equivalent_ring_width(double cum_prev, double cum_i) {
  if (cum_prev < 0.0 || cum_i < 0.0) throw Error(ErrorCode::NegativeArea, "areas must be non-negative");
  if (cum_i < cum_prev) {
    throw Error(ErrorCode::NegativeArea, "cumulative area decreases between consecutive rings");
  }
  return std::sqrt(cum_i / std::numbers::pi) - std::sqrt(cum_prev / std::numbers::pi);
}

/// 2·sqrt(pi·A)/P: 1 for a circle, smaller for any other shape.
inline double circle_similarity(double area, double perimeter) {
  if (!(perimeter > 0.0)) throw Error(ErrorCode::ZeroPerimeter, "perimeter must be positive");
  if (area < 0.0) throw Error(ErrorCode::NegativeArea, "area must be non-negative");
  const double sf = 2.0 * std::sqrt(std::numbers::pi * area) / perimeter;
  return std::clamp(sf, 0.0, 1.0);
}

struct Eccentricity {
  double module = 0.0;  // mm
  double phase = 0.0;   // degrees, CCW from +x as displayed, [0, 360)
};

/// Offset from the pith to the centroid of the region enclosed by ring i.
inline Eccentricity ring_eccentricity(const AnnotationDocument& doc, std::size_t i) {
  if (!doc.pith) throw Error(ErrorCode::MissingPith, "eccentricity needs a pith");
  const auto& scale = detail::require_scale(doc);
  const auto& ring = detail::annual_ring(doc, i);
  const Point2 v = polygon_area_perimeter(ring.points).centroid - doc.pith->center;
  Eccentricity e;
  e.module = scale.to_mm(norm(v));
  e.phase = e.module < 1e-12 ? 0.0 : degrees_from_vector(v);
  return e;
}

struct RegionAreas {
  double ew_area = 0.0;
  double lw_area = 0.0;
  double cumulative_ew_area = 0.0;
};

namespace detail {

/// The earlywood/latewood boundary belonging to annual ring i: a matching
/// year label wins, otherwise the first boundary whose area falls in ring i's
/// band (boundaries larger than every ring are attributed to the outermost).
inline const RingBoundary* find_ew_boundary(const AnnotationDocument& doc, std::size_t i,
                                            const std::vector<const RingBoundary*>& rings) {
  const auto candidates = doc.shapes_of_kind(BoundaryKind::EarlywoodLatewood);
  const RingBoundary& ring = *rings[i];
  if (ring.year_label) {
    for (const auto* c : candidates) {
      if (c->closed && c->year_label == ring.year_label) return c;
    }
  }
  std::vector<double> areas;
  for (const auto* r : rings) areas.push_back(r->enclosed_area());
  for (const auto* c : candidates) {
    if (!c->closed || c->points.size() < 3) continue;
    if (ring.year_label && c->year_label) continue;  // labeled for another year
    const double a = c->enclosed_area();
    std::size_t band = areas.size() - 1;
    for (std::size_t k = 0; k < areas.size(); ++k) {
      if (a <= areas[k]) {
        band = k;
        break;
      }
    }
    if (band == i) return c;
  }
  return nullptr;
}

}  // namespace detail

/// Earlywood, latewood and cumulative earlywood areas of ring i, in mm².
inline RegionAreas region_areas(const AnnotationDocument& doc, std::size_t i) {
  const auto& scale = detail::require_scale(doc);
  const auto rings = doc.annual_rings();
  if (i >= rings.size()) {
    throw Error(ErrorCode::InvalidArgument, "ring index " + std::to_string(i) + " out of range");
  }
  const RingBoundary* ew = detail::find_ew_boundary(doc, i, rings);
  if (ew == nullptr) {
    throw Error(ErrorCode::MissingEWBoundary, "no earlywood/latewood boundary for ring " + std::to_string(i));
  }
  const RingBoundary& outer = *rings[i];
  const RingBoundary* inner = i > 0 ? rings[i - 1] : nullptr;

  auto out_of_band = [&](const std::string& why) {
    return Error(ErrorCode::EWBoundaryOutOfBand, "boundary '" + ew->id + "' " + why);
  };
  if (polylines_cross(ew->points, true, outer.points, true)) throw out_of_band("crosses its outer ring");
  if (!point_in_polygon(ew->points.front(), outer.points)) throw out_of_band("lies outside its outer ring");
  if (inner != nullptr) {
    if (polylines_cross(ew->points, true, inner->points, true)) throw out_of_band("crosses its inner ring");
    if (!point_in_polygon(inner->points.front(), ew->points)) throw out_of_band("lies inside its inner ring");
  }

  const double cum_outer = scale.to_mm2(polygon_area_perimeter(outer.points).area);
  const double cum_inner = inner ? scale.to_mm2(polygon_area_perimeter(inner->points).area) : 0.0;
  RegionAreas r;
  r.cumulative_ew_area = scale.to_mm2(polygon_area_perimeter(ew->points).area);
  r.ew_area = r.cumulative_ew_area - cum_inner;
  r.lw_area = cum_outer - r.cumulative_ew_area;
  return r;
}

/// One row of the per-ring metrics table. Areas in mm², lengths in mm.
struct RingMetricsRow {
  std::size_t ring_index = 0;
  std::optional<int> year_label;
  double annulus_area = 0.0;
  double cumulative_area = 0.0;
  double perimeter = 0.0;
  double equivalent_ring_width = 0.0;
  double similarity_factor = 0.0;
  double eccentricity_module = 0.0;
  double eccentricity_phase = 0.0;
  std::optional<double> ew_area;
  std::optional<double> lw_area;
  std::optional<double> cumulative_ew_area;
  double excluded_area = 0.0;
};

/// Full metrics table for a pith-outward sorted document. Rings without an
/// earlywood/latewood boundary leave the EW/LW fields empty; defect and
/// region-of-interest polygons are reported as excluded area per annulus.
inline std::vector<RingMetricsRow> compute_ring_metrics(const AnnotationDocument& doc) {
  const auto& scale = detail::require_scale(doc);
  if (!doc.pith) throw Error(ErrorCode::MissingPith, "metrics need a pith");
  const auto rings = doc.annual_rings();
  const auto areas = enclosed_areas(doc);

  std::vector<Polygon> defects;
  for (const auto& s : doc.shapes) {
    if ((s.kind == BoundaryKind::Defect || s.kind == BoundaryKind::RegionOfInterest) && s.closed &&
        s.points.size() >= 3)
      defects.push_back(s.points);
  }

  std::vector<RingMetricsRow> rows;
  rows.reserve(rings.size());
  double covered_prev = 0.0;
  for (std::size_t i = 0; i < rings.size(); ++i) {
    const auto stats = polygon_area_perimeter(rings[i]->points);
    RingMetricsRow row;
    row.ring_index = i;
    row.year_label = rings[i]->year_label;
    row.annulus_area = areas[i].annulus;
    row.cumulative_area = areas[i].cumulative;
    row.perimeter = scale.to_mm(stats.perimeter);
    row.equivalent_ring_width =
        equivalent_ring_width(i == 0 ? 0.0 : areas[i - 1].cumulative, areas[i].cumulative);
    row.similarity_factor = circle_similarity(stats.area, stats.perimeter);
    const auto ecc = ring_eccentricity(doc, i);
    row.eccentricity_module = ecc.module;
    row.eccentricity_phase = ecc.phase;
    try {
      const auto ew = region_areas(doc, i);
      row.ew_area = ew.ew_area;
      row.lw_area = ew.lw_area;
      row.cumulative_ew_area = ew.cumulative_ew_area;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MissingEWBoundary) throw;
    }
    if (!defects.empty()) {
      const double covered = scale.to_mm2(covered_area(rings[i]->points, defects));
      row.excluded_area = std::max(0.0, covered - covered_prev);
      covered_prev = covered;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ringkit
