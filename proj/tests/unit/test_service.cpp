#include <filesystem>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "ringkit/http.hpp"
#include "ringkit/io/annotation_json.hpp"
#include "ringkit/io/image_io.hpp"
#include "ringkit/pipeline.hpp"
#include "ringkit/service.hpp"
#include "support/synthetic.hpp"

using namespace ringkit;
namespace fs = std::filesystem;
using nlohmann::json;
using ringkit::testing::circle_ring;

namespace {

fs::path fixture_image() {
  static const fs::path p = [] {
    const auto dir = fs::temp_directory_path() / "ringkit_test_service";
    fs::create_directories(dir);
    ringkit::testing::TargetSpec s;
    s.width = s.height = 320;
    s.rings = 6;
    s.period = 20;
    const auto path = dir / "fixture.png";
    io::save_gray(path, ringkit::testing::render_target(s).image);
    return path;
  }();
  return p;
}

AnnotationDocument three_rings() {
  AnnotationDocument d;
  d.image_path = "disc.png";
  d.image_size = {200, 200};
  d.scale = ScaleCalibration{10.0, ScaleSource::Metadata};
  d.pith = Pith{{100, 100}, PithMethod::Manual};
  for (int k = 1; k <= 3; ++k) d.shapes.push_back(circle_ring("r" + std::to_string(k), {100, 100}, 10.0 * k));
  return d;
}

std::string open_session(EditorService& s) {
  const auto r = s.handle("POST", "/api/session", "", "");
  EXPECT_EQ(r.status, 200);
  return json::parse(r.body)["token"].get<std::string>();
}

}  // namespace

TEST(Service, Sessions) {
  EditorService s;
  const auto token = open_session(s);
  EXPECT_EQ(token.size(), 32u);
  EXPECT_EQ(s.handle("POST", "/api/session", "", "").status, 409);
  EXPECT_EQ(s.handle("DELETE", "/api/session", "", "wrong").status, 409);
  EXPECT_EQ(s.handle("DELETE", "/api/session", "", token).status, 200);
  const auto again = open_session(s);
  EXPECT_NE(again, token);
  EXPECT_EQ(s.handle("PUT", "/api/doc", io::serialize_annotation(three_rings()), token).status, 409);
  EXPECT_EQ(s.handle("PUT", "/api/doc", io::serialize_annotation(three_rings()), again).status, 200);
}

TEST(Service, ReadsNeedNoSession) {
  EditorService s;
  s.load_document(three_rings());
  const auto doc = s.handle("GET", "/api/doc", "", "");
  EXPECT_EQ(doc.status, 200);
  EXPECT_EQ(doc.content_type, "application/json");
  EXPECT_EQ(doc.body, io::serialize_annotation(three_rings()));
  const auto m = s.handle("POST", "/api/metrics", "", "");
  ASSERT_EQ(m.status, 200);
  const auto rows = json::parse(m.body);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0]["cumulativeArea"].get<double>(), 3.14, 0.01);
  EXPECT_EQ(rows[2]["ring"], 2);
}

TEST(Service, PutRejectsCrossingBoundaries) {
  EditorService s;
  s.load_document(three_rings());
  const auto token = open_session(s);
  auto bad = three_rings();
  bad.shapes[1] = circle_ring("r2", {115, 100}, 20);  // pokes through r3
  const auto r = s.handle("PUT", "/api/doc", io::serialize_annotation(bad), token);
  ASSERT_EQ(r.status, 422);
  const auto j = json::parse(r.body);
  EXPECT_EQ(j["error"], "Violations");
  bool crossing = false;
  for (const auto& v : j["violations"]) crossing |= v["kind"] == "CrossingBoundaries";
  EXPECT_TRUE(crossing) << r.body;
  // The stored document is untouched.
  EXPECT_EQ(s.handle("GET", "/api/doc", "", "").body, io::serialize_annotation(three_rings()));
  EXPECT_EQ(s.history_size(), 1u);
  EXPECT_EQ(s.handle("PUT", "/api/doc", "{", token).status, 400);
  EXPECT_EQ(s.handle("PUT", "/api/doc", R"({"version":9})", token).status, 400);
}

TEST(Service, UndoRedoRestoresBytes) {
  EditorService s;
  s.load_document(three_rings());
  const auto token = open_session(s);
  const auto v0 = s.handle("GET", "/api/doc", "", "").body;
  auto d1 = three_rings();
  d1.shapes.pop_back();
  const auto v1 = s.handle("PUT", "/api/doc", io::serialize_annotation(d1), token).body;
  auto d2 = d1;
  d2.shapes[1].points[0].x += 0.5;
  const auto v2 = s.handle("PUT", "/api/doc", io::serialize_annotation(d2), token).body;
  EXPECT_EQ(s.handle("POST", "/api/undo", "", "").status, 409);
  EXPECT_EQ(s.handle("POST", "/api/undo", "", token).body, v1);
  EXPECT_EQ(s.handle("POST", "/api/undo", "", token).body, v0);
  const auto none = s.handle("POST", "/api/undo", "", token);
  EXPECT_EQ(none.status, 422);
  EXPECT_EQ(json::parse(none.body)["error"], "NothingToUndo");
  EXPECT_EQ(s.handle("POST", "/api/redo", "", token).body, v1);
  EXPECT_EQ(s.document(), io::parse_annotation(v1));
  EXPECT_EQ(s.handle("POST", "/api/redo", "", token).body, v2);
  EXPECT_EQ(json::parse(s.handle("POST", "/api/redo", "", token).body)["error"], "NothingToRedo");
  // A new edit after undo drops the redo branch.
  s.handle("POST", "/api/undo", "", token);
  s.handle("PUT", "/api/doc", io::serialize_annotation(three_rings()), token);
  EXPECT_EQ(s.handle("POST", "/api/redo", "", token).status, 422);
}

TEST(Service, HistoryDepth) {
  EditorService s;
  s.load_document(three_rings());
  const auto token = open_session(s);
  auto d = three_rings();
  for (int i = 0; i < 300; ++i) {
    d.shapes[0].label = "edit " + std::to_string(i);
    ASSERT_EQ(s.handle("PUT", "/api/doc", io::serialize_annotation(d), token).status, 200);
  }
  EXPECT_EQ(s.history_size(), kHistoryDepth);
  int undone = 0;
  while (s.handle("POST", "/api/undo", "", token).status == 200) ++undone;
  EXPECT_EQ(undone, static_cast<int>(kHistoryDepth) - 1);
  EXPECT_GE(undone, 100);
  EXPECT_EQ(s.document().shapes[0].label, "edit 44");
}

TEST(Service, MeasureAndExports) {
  EditorService s;
  s.load_document(three_rings());
  EXPECT_EQ(s.handle("GET", "/api/export/pos", "", "").status, 422);
  const auto m = s.handle("POST", "/api/measure", R"({"ray": {"angle": 0}})", "");
  ASSERT_EQ(m.status, 200) << m.body;
  const auto j = json::parse(m.body);
  EXPECT_EQ(j["widths"].size(), 3u);
  EXPECT_NEAR(j["widths"][1]["width"].get<double>(), 1.0, 1e-3);
  EXPECT_EQ(s.handle("POST", "/api/measure", R"({"angle": 90})", "").status, 200);
  EXPECT_EQ(s.handle("POST", "/api/measure", R"({"angle": 90, "bogus": 1})", "").status, 400);
  EXPECT_EQ(s.handle("POST", "/api/measure", R"({"angle": 720})", "").status, 400);
  const auto pos = s.handle("GET", "/api/export/pos", "", "");
  ASSERT_EQ(pos.status, 200);
  EXPECT_NE(pos.body.find("#Angle: 90 deg"), std::string::npos);
  const auto csv = s.handle("GET", "/api/export/csv", "", "");
  EXPECT_EQ(csv.content_type, "text/csv");
  EXPECT_EQ(io::parse_metrics_csv(csv.body).size(), 3u);
  const auto html = s.handle("GET", "/api/export/report", "", "");
  EXPECT_EQ(html.content_type, "text/html");
  EXPECT_NE(html.body.find("class=\"ray\""), std::string::npos);
  EXPECT_EQ(s.handle("GET", "/api/export/pdf", "", "").status, 404);
}

TEST(Service, ErrorStatuses) {
  EditorService s;
  EXPECT_EQ(s.handle("GET", "/api/nowhere", "", "").status, 404);
  EXPECT_EQ(s.handle("DELETE", "/api/doc", "", "").status, 405);
  EXPECT_EQ(s.handle("GET", "/api/metrics", "", "").status, 405);
  EXPECT_EQ(s.handle("GET", "/api/image", "", "").status, 404);
  const auto m = s.handle("POST", "/api/metrics", "", "");
  EXPECT_EQ(m.status, 422);
  EXPECT_EQ(json::parse(m.body)["error"], "MissingScale");
  const auto token = open_session(s);
  const auto d = s.handle("POST", "/api/detect", "{}", token);
  EXPECT_EQ(d.status, 422);
  EXPECT_EQ(json::parse(d.body)["error"], "MissingImage");
}

TEST(Service, DetectMatchesCommandLine) {
  EditorService s;
  s.load_image(fixture_image());
  const auto token = open_session(s);
  EXPECT_EQ(s.handle("POST", "/api/detect", "{}", "").status, 409);
  const auto r = s.handle("POST", "/api/detect", "{}", token);
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.body, io::serialize_annotation(cmd_detect(fixture_image(), {})));
  EXPECT_EQ(s.history_size(), 2u);

  // Options in the body map onto the same detector settings.
  const auto r2 = s.handle("POST", "/api/detect",
                           R"({"config": {"rays": 180, "nodes": 100}, "backgroundRemoval": true, "pith": [160, 158]})", token);
  ASSERT_EQ(r2.status, 200) << r2.body;
  DetectOptions opts;
  opts.detector.num_rays = 180;
  opts.detector.node_budget = 100;
  opts.pith = Point2{160, 158};
  EXPECT_EQ(r2.body, io::serialize_annotation(cmd_detect(fixture_image(), opts)));
  const auto bad = s.handle("POST", "/api/detect", R"({"config": {"raze": 1}})", token);
  EXPECT_EQ(bad.status, 400);
  EXPECT_NE(bad.body.find("config.raze"), std::string::npos);
  EXPECT_EQ(s.handle("POST", "/api/detect", R"({"pith": [1]})", token).status, 400);
  const auto img = s.handle("GET", "/api/image", "", "");
  EXPECT_EQ(img.content_type, "image/png");
  EXPECT_EQ(img.body, io::read_text_file(fixture_image()));
}

TEST(Service, LiveHttp) {
  EditorService service;
  service.load_document(three_rings());
  const auto root = fs::temp_directory_path() / "ringkit_test_service_root";
  fs::create_directories(root);
  io::write_text_file(root / "index.html", "<p>editor</p>\n");
  httplib::Server server;
  bind_http(server, service, root);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  auto doc = cli.Get("/api/doc");
  ASSERT_TRUE(doc);
  EXPECT_EQ(doc->status, 200);
  EXPECT_EQ(doc->body, io::serialize_annotation(three_rings()));
  auto sess = cli.Post("/api/session", "", "application/json");
  ASSERT_TRUE(sess);
  const auto token = json::parse(sess->body)["token"].get<std::string>();
  auto d1 = three_rings();
  d1.shapes.pop_back();
  auto put = cli.Put("/api/doc", httplib::Headers{{"X-Session-Token", token}}, io::serialize_annotation(d1),
                     "application/json");
  ASSERT_TRUE(put);
  EXPECT_EQ(put->status, 200);
  auto no_token = cli.Put("/api/doc", io::serialize_annotation(d1), "application/json");
  EXPECT_EQ(no_token->status, 409);
  auto undo = cli.Post("/api/undo", httplib::Headers{{"X-Session-Token", token}}, "", "application/json");
  EXPECT_EQ(undo->body, io::serialize_annotation(three_rings()));
  auto csv = cli.Get("/api/export/csv");
  EXPECT_EQ(csv->get_header_value("Content-Type"), "text/csv");
  auto page = cli.Get("/index.html");
  ASSERT_TRUE(page);
  EXPECT_EQ(page->body, "<p>editor</p>\n");
  EXPECT_EQ(cli.Get("/api/missing")->status, 404);
  server.stop();
  t.join();
}
