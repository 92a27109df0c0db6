#include <chrono>
#include <cmath>

#include <gtest/gtest.h>

#include "ringkit/detect.hpp"
#include "ringkit/evaluation.hpp"
#include "ringkit/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace ringkit;
using ringkit::testing::render_target;
using ringkit::testing::TargetSpec;

namespace {

std::vector<RingBoundary> detect(const ringkit::testing::Target& t, const DetectorConfig& cfg = {}) {
  const auto mask = remove_background(t.image);
  return detect_rings(t.image, Pith{t.center, PithMethod::Manual}, mask, cfg);
}

std::vector<std::pair<std::string, std::string>> pairs(const MatchReport& r) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& a : r.assignments) out.emplace_back(a.gt_ring_id, a.dt_ring_id);
  return out;
}

TargetSpec small_spec() {
  TargetSpec s;
  s.width = s.height = 600;
  s.rings = 10;
  s.period = 20;
  return s;
}

}  // namespace

TEST(Detect, ConcentricTarget) {
  const auto t = render_target(small_spec());
  const auto rings = detect(t);
  const auto rep = match_detections(t.truth, rings);
  EXPECT_GE(rep.fscore, 90.0);
  EXPECT_LT(ringkit::testing::max_matched_error(t.truth, rings, pairs(rep)), 2.0);
  for (std::size_t i = 0; i < rings.size(); ++i) {
    EXPECT_EQ(rings[i].id, "ring-" + std::to_string(i));
    EXPECT_EQ(rings[i].points.size(), kDefaultNodeBudget);
    EXPECT_TRUE(rings[i].closed);
    EXPECT_EQ(rings[i].kind, BoundaryKind::Annual);
  }
}

TEST(Detect, EllipticalTarget) {
  auto spec = small_spec();
  spec.width = 800;
  spec.axis_ratio = 1.5;
  spec.rotation_deg = 20;
  const auto t = render_target(spec);
  const auto rings = detect(t);
  const auto rep = match_detections(t.truth, rings);
  EXPECT_GE(rep.fscore, 90.0);
  EXPECT_LT(ringkit::testing::max_matched_error(t.truth, rings, pairs(rep)), 3.0);
}

TEST(Detect, OutputValidatesAndIsSorted) {
  const auto t = render_target(small_spec());
  AnnotationDocument doc;
  doc.image_path = "t.png";
  doc.image_size = {t.image.width, t.image.height};
  doc.pith = Pith{t.center, PithMethod::Manual};
  doc.shapes = detect(t);
  EXPECT_TRUE(validate(doc).empty());
  for (std::size_t i = 1; i < doc.shapes.size(); ++i) {
    EXPECT_GT(doc.shapes[i].enclosed_area(), doc.shapes[i - 1].enclosed_area());
  }
}

TEST(Detect, BlankDiscHasNoRings) {
  auto spec = small_spec();
  spec.rings = 0;
  spec.disc_radius = 200;
  const auto t = render_target(spec);
  EXPECT_TRUE(detect(t).empty());
}

TEST(Detect, RotationInvariance) {
  // Same ellipse rotated by 37 degrees: radii along matching rays agree.
  auto spec = small_spec();
  spec.axis_ratio = 1.3;
  spec.width = spec.height = 700;
  const auto a = render_target(spec);
  spec.rotation_deg = 37;
  const auto b = render_target(spec);
  const auto ra = detect(a);
  const auto rb = detect(b);
  ASSERT_EQ(ra.size(), rb.size());
  ASSERT_FALSE(ra.empty());
  double sq = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    for (int deg = 0; deg < 360; deg += 5) {
      const Point2 da = direction_from_degrees(deg);
      const Point2 db = direction_from_degrees(deg + 37.0);
      const auto ha = nearest_ray_hit(a.center, da, ra[k]);
      const auto hb = nearest_ray_hit(b.center, db, rb[k]);
      ASSERT_TRUE(ha && hb);
      sq += (*ha - *hb) * (*ha - *hb);
      ++n;
    }
  }
  EXPECT_LT(std::sqrt(sq / n), 2.0);
}

TEST(Detect, ResizeKeepsRingCount) {
  auto spec = small_spec();
  spec.width = spec.height = 1000;
  spec.period = 40;
  spec.rings = 10;
  const auto t = render_target(spec);
  DetectOptions full;
  full.pith = t.center;
  DetectOptions resized = full;
  resized.detector.resize_max_width = 500;
  const auto d0 = run_detection(t.image, "t.png", full);
  const auto d1 = run_detection(t.image, "t.png", resized);
  EXPECT_EQ(d0.annual_indices().size(), 10u);
  EXPECT_EQ(d1.annual_indices().size(), d0.annual_indices().size());
  EXPECT_EQ(d1.provenance.at("resizeFactor"), "0.5");
  // Coordinates come back in original pixels.
  const auto rep = match_detections(t.truth, d1.shapes);
  EXPECT_GE(rep.fscore, 90.0);
  EXPECT_LT(ringkit::testing::max_matched_error(t.truth, d1.shapes, pairs(rep)), 3.0);
}

TEST(Detect, NodeBudgetAndRayCount) {
  const auto t = render_target(small_spec());
  DetectorConfig cfg;
  cfg.num_rays = 180;
  cfg.node_budget = 64;
  const auto rings = detect(t, cfg);
  ASSERT_FALSE(rings.empty());
  for (const auto& r : rings) EXPECT_EQ(r.points.size(), 64u);
}

TEST(Detect, PolarityFilter) {
  // Only half of the boundaries go dark-to-light walking outward.
  const auto t = render_target(small_spec());
  DetectorConfig cfg;
  cfg.edge_polarity = EdgePolarity::DarkToLight;
  const auto up = detect(t, cfg);
  cfg.edge_polarity = EdgePolarity::LightToDark;
  const auto down = detect(t, cfg);
  EXPECT_GE(up.size(), 4u);
  EXPECT_GE(down.size(), 4u);
  EXPECT_LE(up.size(), 6u);
  EXPECT_LE(down.size(), 6u);
}

TEST(Detect, Errors) {
  const auto t = render_target(small_spec());
  const auto mask = remove_background(t.image);
  try {
    detect_rings(t.image, Pith{{5, 5}, PithMethod::Manual}, mask, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PithOutsideMask);
  }
  DetectorConfig bad;
  bad.num_rays = 2;
  EXPECT_THROW(detect_rings(t.image, Pith{t.center, PithMethod::Manual}, mask, bad), Error);
  bad = {};
  bad.min_ring_gap = 0.5;
  EXPECT_THROW(bad.check(), Error);
  EXPECT_THROW(detect_rings(t.image, Pith{t.center, PithMethod::Manual}, ForegroundMask(3, 3, true), {}), Error);
}

TEST(Detect, Deterministic) {
  const auto t = render_target(small_spec());
  const auto a = detect(t);
  const auto b = detect(t);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].points, b[i].points);
}

TEST(Detect, LargeTargetRuntime) {
  auto spec = small_spec();
  spec.width = spec.height = 3000;
  spec.rings = 30;
  spec.period = 45;
  const auto t = render_target(spec);
  const auto start = std::chrono::steady_clock::now();
  DetectOptions opts;
  const auto doc = run_detection(t.image, "big.png", opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 10.0);
  const auto rep = match_detections(t.truth, doc.shapes);
  EXPECT_GE(rep.fscore, 90.0);
}
