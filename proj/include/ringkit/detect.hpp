#pragma once

// Baseline automatic ring detector.
//
// Rays are cast from the pith at uniform angles and sampled at 1 px steps.
// Each intensity profile is Gaussian-smoothed and differentiated; derivative
// extrema above a per-ray robust threshold (median + 2·MAD of |d|) become
// edge candidates. Candidates are linked around the pith into closed chains
// by a shortest-path search over consecutive rays, and chains covering at
// least 90% of the rays become ring boundaries.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "background.hpp"
#include "core.hpp"
#include "error.hpp"
#include "image.hpp"

namespace ringkit {

/// Sign of the intensity change walking outward from the pith.
enum class EdgePolarity { DarkToLight, LightToDark, Both };

struct DetectorConfig {
  int num_rays = 360;
  std::size_t node_budget = kDefaultNodeBudget;
  double smoothing_sigma = 2.0;
  double min_ring_gap = 4.0;
  EdgePolarity edge_polarity = EdgePolarity::Both;
  int resize_max_width = 10000;

  void check() const {
    if (num_rays < 8) throw Error(ErrorCode::InvalidArgument, "num_rays must be at least 8");
    if (node_budget < 3) throw Error(ErrorCode::InvalidArgument, "node_budget must be at least 3");
    if (!(min_ring_gap >= 1.0)) throw Error(ErrorCode::InvalidArgument, "min_ring_gap must be at least 1");
    if (!(smoothing_sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "smoothing_sigma must be non-negative");
    if (resize_max_width < 0) throw Error(ErrorCode::InvalidArgument, "resize_max_width must be non-negative");
  }

  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

/// One edge candidate on a ray: radius in px from the pith and its strength
/// relative to the ray's threshold statistics.
struct EdgeCandidate {
  double radius = 0.0;
  double strength = 0.0;
  int sign = 0;
};

namespace detail {

inline std::vector<double> gaussian_kernel(double sigma) {
  if (sigma <= 0.0) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;
  return k;
}

inline std::vector<double> convolve_clamped(const std::vector<double>& x, const std::vector<double>& k) {
  const int n = static_cast<int>(x.size());
  const int r = static_cast<int>(k.size() / 2);
  std::vector<double> y(x.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = -r; j <= r; ++j) acc += k[static_cast<std::size_t>(j + r)] * x[static_cast<std::size_t>(std::clamp(i + j, 0, n - 1))];
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

/// Intensity profile from the pith along one direction, 1 px steps, ending at
/// the last sample inside both the image and the mask.
inline std::vector<double> sample_ray(const GrayImage& img, const ForegroundMask& mask, Point2 origin, Point2 dir) {
  std::vector<double> profile;
  for (int t = 0;; ++t) {
    const Point2 p = origin + dir * static_cast<double>(t);
    if (p.x < 0.0 || p.y < 0.0 || p.x > img.width - 1 || p.y > img.height - 1) break;
    if (!mask.contains(p)) break;
    profile.push_back(img.bilinear(p.x, p.y));
  }
  return profile;
}

}  // namespace detail

/// Edge candidates along one intensity profile (index = radius in px).
inline std::vector<EdgeCandidate> profile_edges(const std::vector<double>& profile, const DetectorConfig& cfg) {
  std::vector<EdgeCandidate> out;
  const int n = static_cast<int>(profile.size());
  // Samples next to the mask border blend with the background.
  const int end_margin = 2;
  if (n < 5 + end_margin) return out;
  const auto smooth = detail::convolve_clamped(profile, detail::gaussian_kernel(cfg.smoothing_sigma));
  std::vector<double> d(smooth.size(), 0.0);
  for (int i = 1; i + 1 < n; ++i) d[static_cast<std::size_t>(i)] = 0.5 * (smooth[static_cast<std::size_t>(i + 1)] - smooth[static_cast<std::size_t>(i - 1)]);

  std::vector<double> mag(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) mag[i] = std::abs(d[i]);
  const double med = detail::median_of(mag);
  std::vector<double> dev(mag.size());
  for (std::size_t i = 0; i < mag.size(); ++i) dev[i] = std::abs(mag[i] - med);
  const double mad = detail::median_of(dev);
  const double threshold = std::max(med + 2.0 * mad, 1e-6);
  const double noise = std::max(mad, 1e-9);

  std::vector<EdgeCandidate> raw;
  for (int i = 2; i + 1 < n - end_margin; ++i) {
    const std::size_t u = static_cast<std::size_t>(i);
    const double m = mag[u];
    if (!(m > threshold) || m < mag[u - 1] || !(m > mag[u + 1])) continue;
    const int sign = d[u] > 0.0 ? 1 : -1;
    if (cfg.edge_polarity == EdgePolarity::DarkToLight && sign < 0) continue;
    if (cfg.edge_polarity == EdgePolarity::LightToDark && sign > 0) continue;
    // Parabolic refinement of the extremum position.
    const double a = mag[u - 1];
    const double c = mag[u + 1];
    const double denom = a - 2.0 * m + c;
    const double offset = denom < 0.0 ? std::clamp(0.5 * (a - c) / denom, -0.5, 0.5) : 0.0;
    raw.push_back({static_cast<double>(i) + offset, (m - med) / noise, sign});
  }

  // Keep the strongest candidate within any min_ring_gap window.
  std::vector<std::size_t> idx(raw.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) { return raw[l].strength > raw[r].strength; });
  for (std::size_t i : idx) {
    const bool close = std::any_of(out.begin(), out.end(), [&](const EdgeCandidate& e) {
      return std::abs(e.radius - raw[i].radius) < cfg.min_ring_gap;
    });
    if (!close) out.push_back(raw[i]);
  }
  std::sort(out.begin(), out.end(), [](const EdgeCandidate& l, const EdgeCandidate& r) { return l.radius < r.radius; });
  return out;
}

namespace detail {

struct ChainNode {
  int ray;
  int cand;
};

struct Chain {
  std::vector<ChainNode> nodes;
  double cost = 0.0;
  double mean_cost() const { return nodes.size() > 1 ? cost / static_cast<double>(nodes.size()) : cost; }
};

/// Links candidates around the full circle into closed chains.
class ChainLinker {
 public:
  ChainLinker(const std::vector<std::vector<EdgeCandidate>>& cands, const DetectorConfig& cfg)
      : cands_(cands), n_(static_cast<int>(cands.size())), cfg_(cfg) {
    used_.resize(cands.size());
    for (std::size_t j = 0; j < cands.size(); ++j) used_[j].assign(cands[j].size(), false);
    jump_cap_ = 4.0 * cfg.min_ring_gap;
    max_skip_ = std::max(2, n_ / 36);
    skip_cost_ = 0.25 * cfg.min_ring_gap * cfg.min_ring_gap;
    min_nodes_ = static_cast<std::size_t>(std::ceil(0.9 * n_));
  }

  std::vector<Chain> run() {
    std::vector<int> seed_rays;
    for (int q = 0; q < 4; ++q) seed_rays.push_back((q * n_) / 4);
    std::map<std::pair<int, int>, std::optional<Chain>> cache;
    std::vector<Chain> chains;
    for (;;) {
      const Chain* best = nullptr;
      for (int s : seed_rays) {
        for (int c = 0; c < static_cast<int>(cands_[static_cast<std::size_t>(s)].size()); ++c) {
          if (used_[static_cast<std::size_t>(s)][static_cast<std::size_t>(c)]) continue;
          auto it = cache.find({s, c});
          if (it == cache.end() || (it->second && touches_used(*it->second))) {
            it = cache.insert_or_assign({s, c}, link_from(s, c)).first;
          }
          if (it->second && (best == nullptr || it->second->mean_cost() < best->mean_cost())) best = &*it->second;
        }
      }
      if (best == nullptr) break;
      Chain chosen = *best;
      claim(chosen);
      chains.push_back(std::move(chosen));
    }
    return chains;
  }

 private:
  bool touches_used(const Chain& ch) const {
    return std::any_of(ch.nodes.begin(), ch.nodes.end(), [&](const ChainNode& nd) {
      return used_[static_cast<std::size_t>(nd.ray)][static_cast<std::size_t>(nd.cand)];
    });
  }

  /// Marks the chain's candidates, and any within min_ring_gap of them on the
  /// same ray, as consumed.
  void claim(const Chain& ch) {
    for (const auto& nd : ch.nodes) {
      const auto& ray = cands_[static_cast<std::size_t>(nd.ray)];
      const double r = ray[static_cast<std::size_t>(nd.cand)].radius;
      for (std::size_t c = 0; c < ray.size(); ++c) {
        if (std::abs(ray[c].radius - r) < cfg_.min_ring_gap) used_[static_cast<std::size_t>(nd.ray)][c] = true;
      }
    }
  }

  double radius(int ray, int cand) const {
    return cands_[static_cast<std::size_t>(ray)][static_cast<std::size_t>(cand)].radius;
  }

  /// Shortest closed path starting and ending at one seed candidate. Steps
  /// cost the squared radial jump; each skipped ray costs skip_cost_.
  std::optional<Chain> link_from(int seed_ray, int seed_cand) const {
    const double inf = std::numeric_limits<double>::infinity();
    const double r0 = radius(seed_ray, seed_cand);
    // cost[m][c]: best cost to reach candidate c on ray seed+m.
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(n_));
    std::vector<std::vector<ChainNode>> prev(static_cast<std::size_t>(n_));  // {step, cand}
    cost[0].assign(cands_[static_cast<std::size_t>(seed_ray)].size(), inf);
    prev[0].assign(cost[0].size(), {-1, -1});
    cost[0][static_cast<std::size_t>(seed_cand)] = 0.0;

    for (int m = 1; m < n_; ++m) {
      const int ray = (seed_ray + m) % n_;
      const auto& here = cands_[static_cast<std::size_t>(ray)];
      cost[static_cast<std::size_t>(m)].assign(here.size(), inf);
      prev[static_cast<std::size_t>(m)].assign(here.size(), {-1, -1});
      for (int c = 0; c < static_cast<int>(here.size()); ++c) {
        if (used_[static_cast<std::size_t>(ray)][static_cast<std::size_t>(c)]) continue;
        relax_into(m, c, here[static_cast<std::size_t>(c)].radius, seed_ray, cost, prev);
      }
    }
    // Close the loop back onto the seed.
    double best = inf;
    ChainNode best_prev{-1, -1};
    for (int back = 1; back <= max_skip_ + 1; ++back) {
      const int pm = n_ - back;
      if (pm < 0) break;
      const auto& pc = cost[static_cast<std::size_t>(pm)];
      const int pray = (seed_ray + pm) % n_;
      for (int c = 0; c < static_cast<int>(pc.size()); ++c) {
        if (pc[static_cast<std::size_t>(c)] == inf) continue;
        const double dr = std::abs(radius(pray, c) - r0);
        if (dr > cfg_.min_ring_gap) continue;
        const double v = pc[static_cast<std::size_t>(c)] + dr * dr + skip_cost_ * (back - 1);
        if (v < best) {
          best = v;
          best_prev = {pm, c};
        }
      }
    }
    if (best == inf) return std::nullopt;

    Chain ch;
    ch.cost = best;
    for (ChainNode at = best_prev; at.ray >= 0;) {
      ch.nodes.push_back({(seed_ray + at.ray) % n_, at.cand});
      at = prev[static_cast<std::size_t>(at.ray)][static_cast<std::size_t>(at.cand)];
    }
    std::reverse(ch.nodes.begin(), ch.nodes.end());
    if (ch.nodes.size() < min_nodes_) return std::nullopt;
    // A real boundary moves little between neighbouring rays.
    if (ch.mean_cost() > skip_cost_) return std::nullopt;
    return ch;
  }

  void relax_into(int m, int c, double r, int seed_ray, std::vector<std::vector<double>>& cost,
                  std::vector<std::vector<ChainNode>>& prev) const {
    double& target = cost[static_cast<std::size_t>(m)][static_cast<std::size_t>(c)];
    ChainNode& from = prev[static_cast<std::size_t>(m)][static_cast<std::size_t>(c)];
    for (int back = 1; back <= max_skip_ + 1 && m - back >= 0; ++back) {
      const int pm = m - back;
      const int pray = (seed_ray + pm) % n_;
      const auto& pr = cands_[static_cast<std::size_t>(pray)];
      const auto& pc = cost[static_cast<std::size_t>(pm)];
      auto lo = std::lower_bound(pr.begin(), pr.end(), r - jump_cap_,
                                 [](const EdgeCandidate& e, double v) { return e.radius < v; });
      for (auto it = lo; it != pr.end() && it->radius <= r + jump_cap_; ++it) {
        const int pcand = static_cast<int>(it - pr.begin());
        const double base = pc[static_cast<std::size_t>(pcand)];
        if (base == std::numeric_limits<double>::infinity()) continue;
        const double dr = r - it->radius;
        const double v = base + dr * dr + skip_cost_ * (back - 1);
        if (v < target) {
          target = v;
          from = {pm, pcand};
        }
      }
    }
  }

  const std::vector<std::vector<EdgeCandidate>>& cands_;
  int n_;
  DetectorConfig cfg_;
  std::vector<std::vector<bool>> used_;
  double jump_cap_ = 16.0;
  int max_skip_ = 10;
  double skip_cost_ = 4.0;
  std::size_t min_nodes_ = 0;
};

}  // namespace detail

/// Detects closed annual boundaries around the pith. The result is sorted
/// pith-outward, pairwise non-crossing and resampled to cfg.node_budget.
inline std::vector<RingBoundary> detect_rings(const GrayImage& img, const Pith& pith, const ForegroundMask& mask,
                                              const DetectorConfig& cfg) {
  cfg.check();
  if (mask.width != img.width || mask.height != img.height) {
    throw Error(ErrorCode::InvalidArgument, "mask and image sizes differ");
  }
  if (!mask.contains(pith.center)) throw Error(ErrorCode::PithOutsideMask, "pith lies outside the foreground");

  const int n = cfg.num_rays;
  std::vector<Point2> dirs(static_cast<std::size_t>(n));
  std::vector<std::vector<EdgeCandidate>> cands(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    dirs[static_cast<std::size_t>(j)] = direction_from_degrees(360.0 * j / n);
    cands[static_cast<std::size_t>(j)] =
        profile_edges(detail::sample_ray(img, mask, pith.center, dirs[static_cast<std::size_t>(j)]), cfg);
  }

  const auto chains = detail::ChainLinker(cands, cfg).run();

  struct Built {
    RingBoundary ring;
    double cost;
    double area;
  };
  std::vector<Built> built;
  for (const auto& ch : chains) {
    RingBoundary b;
    b.kind = BoundaryKind::Annual;
    b.closed = true;
    b.label = "ring";
    for (const auto& nd : ch.nodes) {
      const double r = cands[static_cast<std::size_t>(nd.ray)][static_cast<std::size_t>(nd.cand)].radius;
      b.points.push_back(pith.center + dirs[static_cast<std::size_t>(nd.ray)] * r);
    }
    if (b.points.size() < 3 || polyline_self_intersects(b.points, true)) continue;
    b = resample_boundary(b, cfg.node_budget);
    if (!point_in_polygon(pith.center, b.points) || polyline_self_intersects(b.points, true)) continue;
    const double area = b.enclosed_area();
    built.push_back({std::move(b), ch.mean_cost(), area});
  }

  // Cheapest chains win when two cross.
  std::sort(built.begin(), built.end(), [](const Built& l, const Built& r) { return l.cost < r.cost; });
  std::vector<Built> kept;
  for (auto& b : built) {
    const bool conflict = std::any_of(kept.begin(), kept.end(), [&](const Built& k) {
      return std::abs(k.area - b.area) < 1e-9 || polylines_cross(k.ring.points, true, b.ring.points, true);
    });
    if (!conflict) kept.push_back(std::move(b));
  }
  std::sort(kept.begin(), kept.end(), [](const Built& l, const Built& r) { return l.area < r.area; });

  std::vector<RingBoundary> out;
  out.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    kept[i].ring.id = "ring-" + std::to_string(i);
    out.push_back(std::move(kept[i].ring));
  }
  return out;
}

}  // namespace ringkit
