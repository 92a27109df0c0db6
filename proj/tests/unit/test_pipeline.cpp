#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "ringkit/io/annotation_json.hpp"
#include "ringkit/io/image_io.hpp"
#include "ringkit/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace ringkit;
namespace fs = std::filesystem;
using ringkit::testing::render_target;
using ringkit::testing::TargetSpec;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / "ringkit_test_pipeline" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

ringkit::testing::Target disc_target(std::uint32_t seed = 7, int rings = 6) {
  TargetSpec s;
  s.width = s.height = 320;
  s.rings = rings;
  s.period = 20;
  s.seed = seed;
  return render_target(s);
}

fs::path write_disc(const fs::path& dir, const std::string& name, std::uint32_t seed = 7) {
  const auto p = dir / name;
  io::save_gray(p, disc_target(seed).image);
  return p;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(RINGKIT_CLI) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) { return io::read_text_file(p); }

std::size_t files_in(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.is_regular_file() ? 1 : 0;
  return n;
}

}  // namespace

TEST(Pipeline, DetectFromFile) {
  const auto dir = fresh_dir("detect");
  const auto img = write_disc(dir, "disc.png");
  DetectOptions opts;
  opts.pixels_per_mm = 10.0;
  opts.harvest_year = 2020;
  const auto doc = cmd_detect(img, opts, dir / "disc.json");
  EXPECT_EQ(doc.image_path, "disc.png");
  EXPECT_EQ(doc.image_size.width, 320);
  ASSERT_TRUE(doc.scale);
  EXPECT_EQ(doc.scale->pixels_per_mm, 10.0);
  ASSERT_TRUE(doc.pith);
  EXPECT_EQ(doc.pith->method, PithMethod::ForegroundCentroid);
  EXPECT_EQ(doc.annual_rings().size(), 6u);
  EXPECT_EQ(doc.shapes.back().year_label, 2020);
  EXPECT_EQ(doc.shapes.front().year_label, 2015);
  EXPECT_EQ(doc.provenance.at("generator"), "ringkit detect");
  EXPECT_EQ(doc.provenance.at("rays"), "360");
  EXPECT_TRUE(validate(doc).empty());
  EXPECT_EQ(slurp(dir / "disc.json"), io::serialize_annotation(doc));
  const auto t = disc_target();
  const auto rep = match_detections(t.truth, doc.shapes);
  EXPECT_EQ(rep.tp, 6u);
}

TEST(Pipeline, ManualPithAndNoBackgroundRemoval) {
  const auto t = disc_target();
  DetectOptions opts;
  opts.pith = t.center;
  const auto doc = run_detection(t.image, "x.png", opts);
  EXPECT_EQ(doc.pith->method, PithMethod::Manual);
  EXPECT_EQ(doc.pith->center, t.center);
  opts.background_removal = false;
  const auto all = run_detection(t.image, "x.png", opts);
  EXPECT_EQ(all.provenance.at("backgroundRemoval"), "false");
  EXPECT_GE(all.annual_rings().size(), 6u);
  opts.pith = Point2{2, 2};
  opts.background_removal = true;
  try {
    run_detection(t.image, "x.png", opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PithOutsideMask);
    EXPECT_EQ(e.detail().rfind("pith: ", 0), 0u) << e.detail();
  }
}

TEST(Pipeline, StageNamesInErrors) {
  try {
    cmd_detect("/nonexistent/image.png", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
    EXPECT_EQ(e.detail().rfind("load: ", 0), 0u);
  }
  try {
    run_detection(GrayImage(50, 50, 0.0f), "black.png", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyForeground);
    EXPECT_EQ(e.detail().rfind("background: ", 0), 0u);
  }
}

TEST(Pipeline, BatchWritesEveryOutput) {
  const auto dir = fresh_dir("batch");
  for (int i = 0; i < 4; ++i) write_disc(dir, "disc" + std::to_string(i) + ".png", 10 + i);
  const auto cfg = io::parse_batch_config("scale: {pixels_per_mm: 10}\nconcurrency: 2\n");
  const auto out = dir / "out";
  const auto r = run_batch(dir, cfg, out);
  EXPECT_EQ(r.ok_count(), 4u);
  EXPECT_EQ(files_in(out), 13u);  // json, csv and html per image, plus the summary
  for (int i = 0; i < 4; ++i) {
    const auto stem = "disc" + std::to_string(i);
    EXPECT_TRUE(fs::exists(out / (stem + ".json")));
    EXPECT_TRUE(fs::exists(out / (stem + ".csv")));
    EXPECT_TRUE(fs::exists(out / (stem + ".html")));
  }
  const auto summary = slurp(r.summary);
  EXPECT_EQ(summary.rfind("image,status,message,outputs,load_s,detect_s,metrics_s,write_s\n", 0), 0u);
  EXPECT_NE(summary.find("disc3.png,ok,,disc3.json;disc3.csv;disc3.html,"), std::string::npos);
}

TEST(Pipeline, BatchRecordsFailuresAndContinues) {
  const auto dir = fresh_dir("batch_bad");
  for (int i = 0; i < 3; ++i) write_disc(dir, "disc" + std::to_string(i) + ".png", 20 + i);
  std::ofstream(dir / "corrupt.png") << "not an image";
  std::ofstream(dir / "notes.txt") << "ignored";
  const auto cfg = io::parse_batch_config("outputs: [json]\n");
  const auto r = run_batch(dir, cfg, dir / "out");
  ASSERT_EQ(r.entries.size(), 4u);
  EXPECT_EQ(r.ok_count(), 3u);
  const auto& bad = r.entries[0];
  EXPECT_EQ(bad.image.filename(), "corrupt.png");
  EXPECT_FALSE(bad.ok);
  EXPECT_NE(bad.message.find("cannot read image"), std::string::npos);
  EXPECT_NE(slurp(r.summary).find("corrupt.png,error,"), std::string::npos);
}

TEST(Pipeline, BatchPosOutputsPerAngle) {
  const auto dir = fresh_dir("batch_pos");
  write_disc(dir, "a.png");
  const auto cfg = io::parse_batch_config(
      "scale: {pixels_per_mm: 10}\noutputs: [pos]\nmeasurement: {ray_angles: [0, 90, 22.5]}\n");
  const auto r = run_batch(dir, cfg, dir / "out");
  ASSERT_EQ(r.ok_count(), 1u);
  EXPECT_TRUE(fs::exists(dir / "out" / "a_0.pos"));
  EXPECT_TRUE(fs::exists(dir / "out" / "a_90.pos"));
  EXPECT_TRUE(fs::exists(dir / "out" / "a_22p5.pos"));
  const auto f = io::parse_pos(slurp(dir / "out" / "a_90.pos"));
  EXPECT_EQ(f.series.hits.size(), 6u);
  for (const auto& w : f.series.widths) EXPECT_NEAR(w.width, 2.0, 0.3);
}

TEST(Pipeline, BatchDeterministicAcrossConcurrency) {
  const auto dir = fresh_dir("batch_det");
  for (int i = 0; i < 4; ++i) write_disc(dir, "d" + std::to_string(i) + ".png", 30 + i);
  auto cfg = io::parse_batch_config("scale: {pixels_per_mm: 8}\nmeasurement: {ray_angles: [45]}\noutputs: [json, csv, report, pos]\n");
  cfg.concurrency = 1;
  run_batch(dir, cfg, dir / "one");
  cfg.concurrency = 4;
  run_batch(dir, cfg, dir / "four");
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(dir / "one")) {
    if (e.path().filename() == "batch_summary.csv") continue;
    EXPECT_EQ(slurp(e.path()), slurp(dir / "four" / e.path().filename())) << e.path();
    ++compared;
  }
  EXPECT_EQ(compared, 16u);
}

TEST(Cli, ExitCodesAndOutputs) {
  const auto dir = fresh_dir("cli");
  const auto img = write_disc(dir, "disc.png");
  const auto log = dir / "log.txt";
  EXPECT_EQ(run_cli("detect " + (dir / "missing.png").string(), log), 2);
  EXPECT_NE(slurp(log).find("cannot read image"), std::string::npos);
  EXPECT_EQ(run_cli("detect", log), 2);
  EXPECT_EQ(run_cli("--help", log), 0);
  EXPECT_EQ(run_cli("detect " + img.string() + " --pith 3", log), 2);

  ASSERT_EQ(run_cli("detect " + img.string() + " --scale 10 -o " + (dir / "d.json").string(), log), 0) << slurp(log);
  DetectOptions opts;
  opts.pixels_per_mm = 10.0;
  EXPECT_EQ(slurp(dir / "d.json"), io::serialize_annotation(cmd_detect(img, opts)));

  ASSERT_EQ(run_cli("metrics " + (dir / "d.json").string() + " -o " + (dir / "m.csv").string(), log), 0);
  EXPECT_EQ(io::parse_metrics_csv(slurp(dir / "m.csv")).size(), 6u);
  ASSERT_EQ(run_cli("measure " + (dir / "d.json").string() + " --angle 90 -o " + (dir / "n.pos").string(), log), 0);
  EXPECT_EQ(io::parse_pos(slurp(dir / "n.pos")).series.hits.size(), 6u);
  ASSERT_EQ(run_cli("measure " + (dir / "d.json").string() + " --angle 0", log), 0);
  EXPECT_EQ(slurp(log).rfind("Ring,Distance (mm),Width (mm)\n0,", 0), 0u);
  EXPECT_EQ(run_cli("measure " + (dir / "d.json").string() + " --angle 400", log), 3);
  for (const char* ext : {".json", ".csv", ".html", ".svg", ".pos"}) {
    EXPECT_EQ(run_cli("convert " + (dir / "d.json").string() + " --angle 10 -o " + (dir / (std::string("c") + ext)).string(), log), 0)
        << ext << slurp(log);
  }
  EXPECT_EQ(run_cli("convert " + (dir / "d.json").string() + " -o " + (dir / "c.pdf").string(), log), 2);
  std::ofstream(dir / "bad.json") << "{";
  EXPECT_EQ(run_cli("metrics " + (dir / "bad.json").string(), log), 2);
  // Detected annotation without a scale: metrics is a processing error.
  ASSERT_EQ(run_cli("detect " + img.string() + " -o " + (dir / "noscale.json").string(), log), 0);
  EXPECT_EQ(run_cli("metrics " + (dir / "noscale.json").string(), log), 3);
  EXPECT_NE(slurp(log).find("MissingScale"), std::string::npos);
}

TEST(Cli, BatchAndEval) {
  const auto dir = fresh_dir("cli_batch");
  const auto imgs = dir / "imgs";
  fs::create_directories(imgs);
  for (int i = 0; i < 3; ++i) write_disc(imgs, "s" + std::to_string(i) + ".png", 40 + i);
  std::ofstream(imgs / "broken.jpg") << "garbage";
  std::ofstream(dir / "cfg.yaml") << "outputs: [json]\n";
  std::ofstream(dir / "bad.yaml") << "detector:\n  raise: 1\n";
  const auto log = dir / "log.txt";
  EXPECT_EQ(run_cli("batch " + imgs.string() + " --config " + (dir / "bad.yaml").string(), log), 2);
  EXPECT_NE(slurp(log).find("unknown key 'detector.raise'"), std::string::npos);
  ASSERT_EQ(run_cli("batch " + imgs.string() + " --config " + (dir / "cfg.yaml").string() + " -o " +
                        (dir / "dt").string(),
                    log),
            0);
  EXPECT_NE(slurp(log).find("3/4 images ok"), std::string::npos);
  EXPECT_NE(slurp(log).find("partial"), std::string::npos);

  // Ground truth for the three good images.
  const auto gt = dir / "gt";
  fs::create_directories(gt);
  for (int i = 0; i < 3; ++i) {
    auto t = disc_target(40 + i);
    AnnotationDocument d;
    d.image_path = "s" + std::to_string(i) + ".png";
    d.image_size = {t.image.width, t.image.height};
    d.shapes = t.truth;
    io::write_annotation(gt / ("s" + std::to_string(i) + ".json"), d);
  }
  ASSERT_EQ(run_cli("eval " + gt.string() + " " + (dir / "dt").string() + " -o " + (dir / "eval.csv").string(), log), 0)
      << slurp(log);
  const auto csv = slurp(dir / "eval.csv");
  EXPECT_EQ(csv.rfind("Sample,P,R,F\ns0,100.0,100.0,100.0\n", 0), 0u) << csv;
  EXPECT_NE(csv.find("Average,100.0,100.0,100.0\n"), std::string::npos);
  fs::remove(gt / "s2.json");
  EXPECT_EQ(run_cli("eval " + gt.string() + " " + (dir / "dt").string(), log), 2);
  EXPECT_NE(slurp(log).find("s2"), std::string::npos);
}
