#pragma once

// Exact area of boolean combinations of simple polygons by vertical slab
// decomposition. Every vertex and every pairwise edge crossing contributes a
// slab boundary; inside a slab no two edges cross, so the covered length is
// linear in x and the midpoint rule integrates it exactly. Degenerate inputs
// (vertex on edge, shared or collinear edges) need no special handling.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "error.hpp"
#include "primitives.hpp"

namespace ringkit {

using Polygon = std::vector<Point2>;

namespace detail {

struct SlabEdge {
  Point2 a;  // a.x < b.x
  Point2 b;
  std::size_t owner;

  double y_at(double x) const {
    const double t = (x - a.x) / (b.x - a.x);
    return a.y + (b.y - a.y) * t;
  }
};

inline std::vector<SlabEdge> collect_edges(std::span<const Polygon> polys) {
  std::vector<SlabEdge> edges;
  for (std::size_t k = 0; k < polys.size(); ++k) {
    const auto& p = polys[k];
    const std::size_t n = p.size();
    if (n < 3) continue;
    for (std::size_t i = 0; i < n; ++i) {
      Point2 u = p[i];
      Point2 v = p[(i + 1) % n];
      if (u.x == v.x) continue;  // vertical edges have no width
      if (u.x > v.x) std::swap(u, v);
      edges.push_back({u, v, k});
    }
  }
  return edges;
}

/// Sorted distinct x coordinates of all vertices and edge crossings.
inline std::vector<double> slab_breaks(std::span<const Polygon> polys,
                                       const std::vector<SlabEdge>& edges) {
  std::vector<double> xs;
  for (const auto& p : polys) {
    for (const auto& q : p) xs.push_back(q.x);
  }
  std::vector<const SlabEdge*> order;
  order.reserve(edges.size());
  for (const auto& e : edges) order.push_back(&e);
  std::sort(order.begin(), order.end(),
            [](const SlabEdge* l, const SlabEdge* r) { return l->a.x < r->a.x; });
  std::vector<const SlabEdge*> active;
  for (const SlabEdge* e : order) {
    std::erase_if(active, [&](const SlabEdge* o) { return o->b.x <= e->a.x; });
    const double e_lo = std::min(e->a.y, e->b.y);
    const double e_hi = std::max(e->a.y, e->b.y);
    for (const SlabEdge* o : active) {
      if (std::max(o->a.y, o->b.y) < e_lo || std::min(o->a.y, o->b.y) > e_hi) continue;
      const Point2 r = e->b - e->a;
      const Point2 s = o->b - o->a;
      const double denom = cross(r, s);
      if (denom == 0.0) continue;  // parallel: endpoints already recorded
      const Point2 w = o->a - e->a;
      const double t = cross(w, s) / denom;
      const double u = cross(w, r) / denom;
      if (t > 0.0 && t < 1.0 && u > 0.0 && u < 1.0) xs.push_back(e->a.x + r.x * t);
    }
    active.push_back(e);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

}  // namespace detail

/// Area of the set of points whose per-polygon membership (even-odd) satisfies
/// the predicate. `inside[k]` is true when the point lies inside polys[k].
inline double boolean_area(std::span<const Polygon> polys,
                           const std::function<bool(const std::vector<bool>&)>& keep) {
  const auto edges = detail::collect_edges(polys);
  if (edges.empty()) return 0.0;
  const auto xs = detail::slab_breaks(polys, edges);

  std::vector<const detail::SlabEdge*> order;
  order.reserve(edges.size());
  for (const auto& e : edges) order.push_back(&e);
  std::sort(order.begin(), order.end(),
            [](const detail::SlabEdge* l, const detail::SlabEdge* r) { return l->a.x < r->a.x; });

  double area = 0.0;
  std::size_t next = 0;
  std::vector<const detail::SlabEdge*> active;
  std::vector<std::pair<double, std::size_t>> crossings;
  std::vector<bool> inside(polys.size(), false);
  for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
    const double x0 = xs[s];
    const double x1 = xs[s + 1];
    const double width = x1 - x0;
    if (!(width > 0.0)) continue;
    const double xm = 0.5 * (x0 + x1);
    while (next < order.size() && order[next]->a.x < xm) active.push_back(order[next++]);
    std::erase_if(active, [&](const detail::SlabEdge* e) { return e->b.x <= xm; });

    crossings.clear();
    for (const auto* e : active) crossings.emplace_back(e->y_at(xm), e->owner);
    std::sort(crossings.begin(), crossings.end());

    std::fill(inside.begin(), inside.end(), false);
    double length = 0.0;
    for (std::size_t c = 0; c + 1 < crossings.size(); ++c) {
      inside[crossings[c].second] = !inside[crossings[c].second];
      if (keep(inside)) length += crossings[c + 1].first - crossings[c].first;
    }
    area += length * width;
  }
  return area;
}

/// Area covered by the union of the polygons.
inline double union_area(std::span<const Polygon> polys) {
  return boolean_area(polys, [](const std::vector<bool>& in) {
    return std::find(in.begin(), in.end(), true) != in.end();
  });
}

/// Area of region ∩ (d_1 ∪ ... ∪ d_k).
inline double covered_area(const Polygon& region, std::span<const Polygon> defects) {
  if (defects.empty()) return 0.0;
  std::vector<Polygon> all;
  all.reserve(defects.size() + 1);
  all.push_back(region);
  all.insert(all.end(), defects.begin(), defects.end());
  return boolean_area(all, [](const std::vector<bool>& in) {
    if (!in[0]) return false;
    for (std::size_t k = 1; k < in.size(); ++k) {
      if (in[k]) return true;
    }
    return false;
  });
}

/// Area of the region with everything covered by any defect removed.
inline double area_excluding(const Polygon& region, std::span<const Polygon> defects) {
  const double total = std::abs(signed_area(region));
  if (region.size() < 3 || total < 1e-12) {
    throw Error(ErrorCode::DegeneratePolygon, "region has no area");
  }
  for (const auto& d : defects) {
    if (d.size() < 3) throw Error(ErrorCode::DegeneratePolygon, "defect has fewer than 3 points");
  }
  return std::max(0.0, total - covered_area(region, defects));
}

}  // namespace ringkit
