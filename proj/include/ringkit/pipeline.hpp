#pragma once

// End-to-end flows shared by the command line and the HTTP service: single
// image detection, folder evaluation and batch processing.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "background.hpp"
#include "core.hpp"
#include "detect.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "geometry.hpp"
#include "image.hpp"
#include "io/annotation_json.hpp"
#include "io/batch_config.hpp"
#include "io/format.hpp"
#include "io/image_io.hpp"
#include "io/metrics_csv.hpp"
#include "io/pos.hpp"
#include "io/report.hpp"
#include "measurement.hpp"

namespace ringkit {

struct DetectOptions {
  DetectorConfig detector;
  bool background_removal = true;
  std::optional<Point2> pith;  // original image px
  std::optional<double> pixels_per_mm;
  std::optional<int> harvest_year;
};

namespace detail {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(name) + ": " + e.detail());
  }
}

// Pixel-centre mapping between the original and a resized grid.
inline Point2 to_resized(Point2 p, double s) { return {(p.x + 0.5) * s - 0.5, (p.y + 0.5) * s - 0.5}; }
inline Point2 from_resized(Point2 p, double s) { return {(p.x + 0.5) / s - 0.5, (p.y + 0.5) / s - 0.5}; }

}  // namespace detail

/// Resize (when wider than resize_max_width), background removal, pith,
/// ring detection and sorting. Coordinates in the result refer to the
/// original image.
inline AnnotationDocument run_detection(const GrayImage& img, const std::string& image_path,
                                        const DetectOptions& opts) {
  detail::stage("config", [&] { opts.detector.check(); });
  if (img.width <= 0 || img.height <= 0) throw Error(ErrorCode::ZeroDimension, "load: empty image");

  double s = 1.0;
  GrayImage work;
  const GrayImage* src = &img;
  if (img.width > opts.detector.resize_max_width) {
    s = static_cast<double>(opts.detector.resize_max_width) / img.width;
    const int h = std::max(1, static_cast<int>(std::lround(img.height * s)));
    work = detail::stage("resize", [&] { return resize_lanczos(img, opts.detector.resize_max_width, h); });
    src = &work;
  }

  const ForegroundMask mask = detail::stage("background", [&] {
    if (opts.background_removal) return remove_background(*src);
    return ForegroundMask(src->width, src->height, true);
  });

  const Pith pith_work = detail::stage("pith", [&] {
    if (opts.pith) {
      Pith p{detail::to_resized(*opts.pith, s), PithMethod::Manual};
      if (!mask.contains(p.center)) throw Error(ErrorCode::PithOutsideMask, "pith lies outside the foreground");
      return p;
    }
    return estimate_pith(mask);
  });

  auto rings = detail::stage("detect", [&] { return detect_rings(*src, pith_work, mask, opts.detector); });

  AnnotationDocument doc;
  doc.image_path = image_path;
  doc.image_size = {img.width, img.height};
  if (opts.pixels_per_mm) doc.scale = ScaleCalibration{*opts.pixels_per_mm, ScaleSource::Metadata};
  doc.pith = Pith{opts.pith ? *opts.pith : pith_work.center, pith_work.method};
  if (s != 1.0 && !opts.pith) doc.pith->center = detail::from_resized(pith_work.center, s);
  doc.harvest_year = opts.harvest_year;
  if (s != 1.0) {
    for (auto& r : rings) {
      for (auto& p : r.points) p = detail::from_resized(p, s);
    }
  }
  doc.shapes = std::move(rings);
  doc.provenance = {{"generator", "ringkit detect"},
                    {"rays", std::to_string(opts.detector.num_rays)},
                    {"nodes", std::to_string(opts.detector.node_budget)},
                    {"smoothingSigma", io::shortest(opts.detector.smoothing_sigma)},
                    {"minRingGap", io::shortest(opts.detector.min_ring_gap)},
                    {"edgePolarity", io::to_string(opts.detector.edge_polarity)},
                    {"backgroundRemoval", opts.background_removal ? "true" : "false"},
                    {"resizeFactor", io::shortest(s)}};
  return detail::stage("sort", [&] { return sort_rings(doc); });
}

/// Single-image command: load, detect and optionally write the annotation.
inline AnnotationDocument cmd_detect(const std::filesystem::path& image, const DetectOptions& opts,
                                     const std::optional<std::filesystem::path>& output = std::nullopt) {
  const GrayImage img = detail::stage("load", [&] { return io::load_gray(image); });
  auto doc = run_detection(img, image.filename().string(), opts);
  if (output) io::write_annotation(*output, doc);
  return doc;
}

// ---------------------------------------------------------------------------
// Folder evaluation

struct SampleScore {
  std::string sample;
  MatchReport report;
};

struct FolderEvaluation {
  std::vector<SampleScore> samples;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_fscore = 0.0;

  std::string to_csv() const {
    std::string out = "Sample,P,R,F\n";
    for (const auto& s : samples) {
      out += s.sample + "," + io::fixed(s.report.precision, 1) + "," + io::fixed(s.report.recall, 1) + "," +
             io::fixed(s.report.fscore, 1) + "\n";
    }
    out += "Average," + io::fixed(mean_precision, 1) + "," + io::fixed(mean_recall, 1) + "," +
           io::fixed(mean_fscore, 1) + "\n";
    return out;
  }
};

inline std::vector<RingBoundary> annual_copy(const AnnotationDocument& doc) {
  std::vector<RingBoundary> out;
  for (const auto* r : doc.annual_rings()) out.push_back(*r);
  return out;
}

/// Unweighted column means over the samples; all zero when there are none.
inline void fill_means(FolderEvaluation& ev) {
  if (ev.samples.empty()) return;
  const double n = static_cast<double>(ev.samples.size());
  for (const auto& s : ev.samples) {
    ev.mean_precision += s.report.precision;
    ev.mean_recall += s.report.recall;
    ev.mean_fscore += s.report.fscore;
  }
  ev.mean_precision /= n;
  ev.mean_recall /= n;
  ev.mean_fscore /= n;
}

/// Pairs <name>.json files by name across the two folders.
inline FolderEvaluation evaluate_folder(const std::filesystem::path& gt_dir, const std::filesystem::path& dt_dir,
                                        double threshold = 0.90) {
  namespace fs = std::filesystem;
  auto list = [](const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "not a directory: '" + dir.string() + "'");
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".json") names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
  };
  const auto gt_names = list(gt_dir);
  const auto dt_names = list(dt_dir);
  for (const auto& n : gt_names) {
    if (!std::binary_search(dt_names.begin(), dt_names.end(), n)) {
      throw Error(ErrorCode::MissingPair, "no detection for sample '" + fs::path(n).stem().string() + "'");
    }
  }
  for (const auto& n : dt_names) {
    if (!std::binary_search(gt_names.begin(), gt_names.end(), n)) {
      throw Error(ErrorCode::MissingPair, "no ground truth for sample '" + fs::path(n).stem().string() + "'");
    }
  }
  FolderEvaluation ev;
  for (const auto& n : gt_names) {
    const auto gt = io::read_annotation(gt_dir / n);
    const auto dt = io::read_annotation(dt_dir / n);
    ev.samples.push_back({fs::path(n).stem().string(), match_detections(annual_copy(gt), annual_copy(dt), threshold)});
  }
  fill_means(ev);
  return ev;
}

// ---------------------------------------------------------------------------
// Batch

struct StageTimes {
  double load = 0.0;
  double detect = 0.0;
  double metrics = 0.0;
  double write = 0.0;
};

struct BatchEntry {
  std::filesystem::path image;
  bool ok = false;
  std::string message;
  std::vector<std::filesystem::path> outputs;
  StageTimes seconds;
};

struct BatchResult {
  std::vector<BatchEntry> entries;
  std::filesystem::path summary;

  std::size_t ok_count() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const BatchEntry& e) { return e.ok; }));
  }
};

inline bool is_raster_file(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

inline std::string angle_tag(double deg) {
  auto s = io::shortest(deg);
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

inline BatchEntry process_batch_image(const std::filesystem::path& image, const std::filesystem::path& out_dir,
                                      const io::BatchConfig& cfg) {
  using clock = std::chrono::steady_clock;
  auto secs = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
  BatchEntry e;
  e.image = image;
  try {
    auto t0 = clock::now();
    const GrayImage img = detail::stage("load", [&] { return io::load_gray(image); });
    auto t1 = clock::now();
    DetectOptions opts;
    opts.detector = cfg.detector;
    opts.background_removal = cfg.background_removal;
    opts.pith = cfg.pith;
    opts.pixels_per_mm = cfg.pixels_per_mm;
    const auto doc = run_detection(img, image.filename().string(), opts);
    auto t2 = clock::now();
    std::vector<RingMetricsRow> rows;
    std::vector<RaySeries> series;
    if (cfg.pixels_per_mm) {
      rows = detail::stage("metrics", [&] { return compute_ring_metrics(doc); });
      for (double a : cfg.ray_angles) {
        series.push_back(detail::stage("measure", [&] { return measure_ray(doc, RaySpec{std::nullopt, a, std::nullopt}); }));
      }
    }
    auto t3 = clock::now();
    const auto stem = image.stem().string();
    auto emit = [&](const std::string& name, const std::string& text) {
      const auto p = out_dir / name;
      io::write_text_file(p, text);
      e.outputs.push_back(p);
    };
    detail::stage("write", [&] {
      if (cfg.wants("json")) emit(stem + ".json", io::serialize_annotation(doc));
      if (cfg.wants("csv")) emit(stem + ".csv", io::write_metrics_csv(rows));
      if (cfg.wants("report")) {
        const std::optional<RaySeries> first = series.empty() ? std::nullopt : std::optional<RaySeries>(series.front());
        emit(stem + ".html", io::render_report(doc, rows, first).html);
      }
      if (cfg.wants("pos")) {
        for (const auto& s : series) {
          if (s.hits.empty()) continue;
          emit(stem + "_" + angle_tag(s.ray.angle) + ".pos", io::write_pos(s, {stem, "", *cfg.pixels_per_mm}));
        }
      }
    });
    auto t4 = clock::now();
    e.seconds = {secs(t0, t1), secs(t1, t2), secs(t2, t3), secs(t3, t4)};
    e.ok = true;
  } catch (const std::exception& ex) {
    e.ok = false;
    e.message = ex.what();
  }
  return e;
}

inline std::string batch_summary_csv(const BatchResult& r) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  std::string out = "image,status,message,outputs,load_s,detect_s,metrics_s,write_s\n";
  for (const auto& e : r.entries) {
    std::string outs;
    for (const auto& p : e.outputs) outs += (outs.empty() ? "" : ";") + p.filename().string();
    out += quote(e.image.filename().string()) + "," + (e.ok ? "ok" : "error") + "," + quote(e.message) + "," +
           quote(outs) + "," + io::fixed(e.seconds.load, 3) + "," + io::fixed(e.seconds.detect, 3) + "," +
           io::fixed(e.seconds.metrics, 3) + "," + io::fixed(e.seconds.write, 3) + "\n";
  }
  return out;
}

/// Runs every PNG/JPEG in the folder (sorted by name) through detection and
/// the configured writers. Per-image failures are recorded, never thrown.
inline BatchResult run_batch(const std::filesystem::path& folder, const io::BatchConfig& cfg,
                             std::optional<std::filesystem::path> out_dir = std::nullopt) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(folder)) throw Error(ErrorCode::IoError, "not a directory: '" + folder.string() + "'");
  const fs::path out = out_dir ? *out_dir : (cfg.output_dir ? fs::path(*cfg.output_dir) : folder / "ringkit_out");
  fs::create_directories(out);

  std::vector<fs::path> images;
  for (const auto& e : fs::directory_iterator(folder)) {
    if (e.is_regular_file() && is_raster_file(e.path())) images.push_back(e.path());
  }
  std::sort(images.begin(), images.end());

  BatchResult result;
  result.entries.resize(images.size());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::min<std::size_t>(images.size(), cfg.concurrency ? static_cast<std::size_t>(*cfg.concurrency) : hw);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < images.size();) {
      result.entries[i] = process_batch_image(images[i], out, cfg);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  result.summary = out / "batch_summary.csv";
  io::write_text_file(result.summary, batch_summary_csv(result));
  return result;
}

}  // namespace ringkit
