#pragma once

// Detection-versus-ground-truth matching with precision, recall and F-score.
//
// Each ground-truth ring owns the set of points closer to it than to any other
// ground-truth ring (its area of influence). A detection qualifies for a ring
// when more than `threshold` of its nodes fall in that ring's area; each ring
// takes the qualifying detection with the smallest mean node distance, and
// conflicts are settled greedily by globally smallest mean distance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "core.hpp"
#include "error.hpp"
#include "primitives.hpp"

namespace ringkit {

struct NearestRing {
  std::size_t ring = 0;
  double distance = 0.0;
};

/// Distances within this tolerance count as ties and go to the lower index.
inline constexpr double kTieEps = 1e-9;

/// Uniform grid over ground-truth segments for nearest-boundary queries.
class GroundTruthIndex {
 public:
  explicit GroundTruthIndex(const std::vector<RingBoundary>& rings) {
    if (rings.empty()) throw Error(ErrorCode::NoGroundTruth, "no ground-truth rings");
    double total_len = 0.0;
    for (std::size_t r = 0; r < rings.size(); ++r) {
      const auto& pts = rings[r].points;
      const std::size_t m = segment_count(pts.size(), rings[r].closed);
      if (pts.size() == 1) segs_.push_back({pts[0], pts[0], r});
      for (std::size_t i = 0; i < m; ++i) {
        segs_.push_back({pts[i], pts[(i + 1) % pts.size()], r});
        total_len += distance(pts[i], pts[(i + 1) % pts.size()]);
      }
    }
    if (segs_.empty()) throw Error(ErrorCode::NoGroundTruth, "ground-truth rings have no points");
    for (const auto& s : segs_) {
      box_.extend(s.a);
      box_.extend(s.b);
    }
    const double avg = total_len / static_cast<double>(segs_.size());
    cell_ = std::max({avg * 2.0, (box_.max_x - box_.min_x) / 512.0, (box_.max_y - box_.min_y) / 512.0, 1e-6});
    nx_ = static_cast<int>((box_.max_x - box_.min_x) / cell_) + 1;
    ny_ = static_cast<int>((box_.max_y - box_.min_y) / cell_) + 1;
    cells_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t i = 0; i < segs_.size(); ++i) {
      const auto& s = segs_[i];
      const int x0 = cx(std::min(s.a.x, s.b.x));
      const int x1 = cx(std::max(s.a.x, s.b.x));
      const int y0 = cy(std::min(s.a.y, s.b.y));
      const int y1 = cy(std::max(s.a.y, s.b.y));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) cells_[static_cast<std::size_t>(y) * nx_ + x].push_back(i);
      }
    }
  }

  NearestRing nearest(Point2 p) const {
    NearestRing best{0, std::numeric_limits<double>::infinity()};
    auto consider = [&](std::size_t i) {
      const auto& s = segs_[i];
      const double d = point_segment_distance(p, s.a, s.b);
      if (d < best.distance - kTieEps) {
        best = {s.ring, d};
      } else if (d <= best.distance + kTieEps) {
        best.ring = std::min(best.ring, s.ring);
        best.distance = std::min(best.distance, d);
      }
    };
    const int px = std::clamp(cx(p.x), 0, nx_ - 1);
    const int py = std::clamp(cy(p.y), 0, ny_ - 1);
    // Distance from p to the grid box, so rings of cells can be bounded.
    const double outside = std::hypot(std::max({box_.min_x - p.x, 0.0, p.x - box_.max_x}),
                                      std::max({box_.min_y - p.y, 0.0, p.y - box_.max_y}));
    const int max_ring = std::max(nx_, ny_);
    for (int ring = 0; ring <= max_ring; ++ring) {
      // Cells at Chebyshev ring k are at least (k - 1) * cell_ away.
      if (ring > 0 && best.distance + kTieEps < std::max(outside, (ring - 1) * cell_)) break;
      for (int y = py - ring; y <= py + ring; ++y) {
        if (y < 0 || y >= ny_) continue;
        const bool edge_row = (y == py - ring || y == py + ring);
        for (int x = px - ring; x <= px + ring; x += (edge_row ? 1 : 2 * ring)) {
          if (x >= 0 && x < nx_) {
            for (std::size_t i : cells_[static_cast<std::size_t>(y) * nx_ + x]) consider(i);
          }
          if (ring == 0) break;
        }
      }
    }
    return best;
  }

 private:
  struct Seg {
    Point2 a, b;
    std::size_t ring;
  };
  int cx(double x) const { return std::clamp(static_cast<int>((x - box_.min_x) / cell_), 0, nx_ - 1); }
  int cy(double y) const { return std::clamp(static_cast<int>((y - box_.min_y) / cell_), 0, ny_ - 1); }

  std::vector<Seg> segs_;
  BBox box_;
  double cell_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<std::vector<std::size_t>> cells_;
};

/// Nearest ground-truth boundary of a point; ties go to the lower ring index.
inline NearestRing nearest_gt(Point2 p, const std::vector<RingBoundary>& gt_rings) {
  return GroundTruthIndex(gt_rings).nearest(p);
}

struct Assignment {
  std::string gt_ring_id;
  std::string dt_ring_id;
  double fraction_in_band = 0.0;
  double mean_distance = 0.0;
};

struct MatchReport {
  std::vector<Assignment> assignments;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;  // percent
  double recall = 0.0;     // percent
  double fscore = 0.0;     // percent
};

struct PrfScores {
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;
};

/// Precision, recall and F-score in percent; 0/0 is reported as 0.
inline PrfScores prf_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  PrfScores s;
  s.precision = tp + fp == 0 ? 0.0 : 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
  s.recall = tp + fn == 0 ? 0.0 : 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
  s.fscore = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

inline MatchReport match_detections(const std::vector<RingBoundary>& gt, const std::vector<RingBoundary>& dt,
                                    double threshold = 0.90) {
  MatchReport rep;
  if (gt.empty()) {
    rep.fp = dt.size();
    const auto s = prf_from_counts(0, rep.fp, 0);
    rep.precision = s.precision;
    rep.recall = s.recall;
    rep.fscore = s.fscore;
    return rep;
  }
  const GroundTruthIndex index(gt);

  struct Candidate {
    double mean;
    std::size_t g;
    std::size_t d;
    double fraction;
  };
  std::vector<Candidate> cands;
  for (std::size_t d = 0; d < dt.size(); ++d) {
    const auto& nodes = dt[d].points;
    if (nodes.empty()) continue;
    std::vector<std::size_t> votes(gt.size(), 0);
    for (const auto& p : nodes) ++votes[index.nearest(p).ring];
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const double fraction = static_cast<double>(votes[g]) / static_cast<double>(nodes.size());
      if (!(fraction > threshold)) continue;
      double sum = 0.0;
      for (const auto& p : nodes) sum += point_polyline_distance(p, gt[g].points, gt[g].closed);
      cands.push_back({sum / static_cast<double>(nodes.size()), g, d, fraction});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& l, const Candidate& r) {
    return std::tie(l.mean, l.g, l.d) < std::tie(r.mean, r.g, r.d);
  });
  std::vector<bool> gt_taken(gt.size(), false);
  std::vector<bool> dt_taken(dt.size(), false);
  for (const auto& c : cands) {
    if (gt_taken[c.g] || dt_taken[c.d]) continue;
    gt_taken[c.g] = true;
    dt_taken[c.d] = true;
    rep.assignments.push_back({gt[c.g].id, dt[c.d].id, c.fraction, c.mean});
  }
  rep.tp = rep.assignments.size();
  rep.fp = dt.size() - rep.tp;
  rep.fn = gt.size() - rep.tp;
  const auto s = prf_from_counts(rep.tp, rep.fp, rep.fn);
  rep.precision = s.precision;
  rep.recall = s.recall;
  rep.fscore = s.fscore;
  return rep;
}

}  // namespace ringkit
