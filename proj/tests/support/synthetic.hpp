#pragma once

// Synthetic ring targets with analytically known boundaries. Used as the
// ground-truth oracle for detector, evaluation and pipeline tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ringkit/core.hpp"
#include "ringkit/image.hpp"

namespace ringkit::testing {

struct TargetSpec {
  int width = 2000;
  int height = 2000;
  int rings = 10;
  double period = 20.0;       // px between boundaries along the short axis
  double contrast = 0.6;
  double noise_sigma = 0.05;
  double axis_ratio = 1.0;    // stretch of the major axis
  double rotation_deg = 0.0;  // major axis angle, CCW as displayed
  Point2 center{-1.0, -1.0};  // defaults to the image center
  double disc_radius = -1.0;  // defaults to period * (rings + 1)
  std::uint32_t seed = 7;
};

struct Target {
  GrayImage image;
  Point2 center;
  std::vector<RingBoundary> truth;  // pith outward
  TargetSpec spec;

  /// Radius of boundary k (1-based) along the displayed direction angle_deg.
  double boundary_radius(int k, double angle_deg) const {
    const double b = spec.period * k;
    const double a = b * spec.axis_ratio;
    const double phi = (angle_deg - spec.rotation_deg) * std::numbers::pi / 180.0;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    return 1.0 / std::sqrt(c * c / (a * a) + s * s / (b * b));
  }
};

/// Normalized elliptical radius of an image point, in short-axis pixels.
inline double elliptical_radius(const TargetSpec& spec, Point2 center, Point2 p) {
  const double dx = p.x - center.x;
  const double dy = -(p.y - center.y);  // y up for the rotation
  const double rot = spec.rotation_deg * std::numbers::pi / 180.0;
  const double u = dx * std::cos(rot) + dy * std::sin(rot);
  const double v = -dx * std::sin(rot) + dy * std::cos(rot);
  return std::sqrt((u / spec.axis_ratio) * (u / spec.axis_ratio) + v * v);
}

/// Alternating light/dark annuli inside a disc on a black background. The
/// outermost annulus is light so the disc edge separates it from the background.
inline Target render_target(const TargetSpec& spec) {
  Target t;
  t.spec = spec;
  t.center = spec.center.x < 0.0 ? Point2{(spec.width - 1) / 2.0, (spec.height - 1) / 2.0} : spec.center;
  t.image = GrayImage(spec.width, spec.height);
  const double high = 0.5 + spec.contrast / 2.0;
  const double low = 0.5 - spec.contrast / 2.0;
  const double disc = spec.disc_radius > 0.0 ? spec.disc_radius : spec.period * (spec.rings + 1);
  std::mt19937 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const double rho = elliptical_radius(spec, t.center, {static_cast<double>(x), static_cast<double>(y)});
      double v = 0.0;
      if (rho < disc) {
        const int k = static_cast<int>(std::floor(rho / spec.period));
        v = (spec.rings == 0 || (spec.rings - k) % 2 == 0) ? high : low;
      }
      if (spec.noise_sigma > 0.0) v += noise(rng);
      t.image.at(x, y) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  for (int k = 1; k <= spec.rings; ++k) {
    RingBoundary b;
    b.id = "gt-" + std::to_string(k - 1);
    b.label = "ring";
    b.closed = true;
    b.node_budget = 360;
    for (int j = 0; j < 360; ++j) {
      const double ang = static_cast<double>(j);
      b.points.push_back(t.center + direction_from_degrees(ang) * t.boundary_radius(k, ang));
    }
    t.truth.push_back(std::move(b));
  }
  return t;
}

/// Closed polyline approximating a circle.
inline std::vector<Point2> circle_points(Point2 c, double r, std::size_t n = 360, double phase_deg = 0.0) {
  std::vector<Point2> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back(c + direction_from_degrees(phase_deg + 360.0 * static_cast<double>(i) / static_cast<double>(n)) * r);
  }
  return pts;
}

inline RingBoundary circle_ring(const std::string& id, Point2 c, double r, std::size_t n = 360) {
  RingBoundary b;
  b.id = id;
  b.label = "ring";
  b.points = circle_points(c, r, n);
  b.node_budget = n;
  return b;
}

/// Largest distance from any node of a detection to the ground-truth
/// boundary it was matched with, over all matched pairs (by id).
inline double max_matched_error(const std::vector<RingBoundary>& gt, const std::vector<RingBoundary>& dt,
                                const std::vector<std::pair<std::string, std::string>>& pairs) {
  double worst = 0.0;
  for (const auto& [gid, did] : pairs) {
    const auto g = std::find_if(gt.begin(), gt.end(), [&](const RingBoundary& b) { return b.id == gid; });
    const auto d = std::find_if(dt.begin(), dt.end(), [&](const RingBoundary& b) { return b.id == did; });
    if (g == gt.end() || d == dt.end()) continue;
    for (const auto& p : d->points) {
      double best = 1e300;
      const std::size_t n = g->points.size();
      for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = g->points[i];
        const Point2 b = g->points[(i + 1) % n];
        const Point2 ab = b - a;
        const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
        best = std::min(best, distance(p, a + ab * t));
      }
      worst = std::max(worst, best);
    }
  }
  return worst;
}

}  // namespace ringkit::testing
