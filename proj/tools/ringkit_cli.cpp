// ringkit command line: detect, metrics, measure, eval, convert, batch, serve.
//
// Exit codes: 0 success (a batch with failed images included), 2 usage,
// configuration or unreadable input, 3 processing error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ringkit/http.hpp"
#include "ringkit/io/annotation_json.hpp"
#include "ringkit/io/batch_config.hpp"
#include "ringkit/io/format.hpp"
#include "ringkit/io/metrics_csv.hpp"
#include "ringkit/io/pos.hpp"
#include "ringkit/io/report.hpp"
#include "ringkit/measurement.hpp"
#include "ringkit/pipeline.hpp"
#include "ringkit/service.hpp"

namespace fs = std::filesystem;
using namespace ringkit;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitProcessing = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
    case ErrorCode::SchemaError:
    case ErrorCode::VersionError:
    case ErrorCode::ConfigError:
    case ErrorCode::MissingPair:
      return kExitUsage;
    default:
      return kExitProcessing;
  }
}

Point2 parse_xy(const std::string& s, const char* flag) {
  const auto parts = io::split(s, ',');
  Point2 p;
  if (parts.size() != 2 || !io::parse_double(parts[0], p.x) || !io::parse_double(parts[1], p.y)) {
    throw UsageError(std::string(flag) + ": expected X,Y but got '" + s + "'");
  }
  return p;
}

void emit(const std::optional<std::string>& out, const std::string& text) {
  if (out) {
    io::write_text_file(*out, text);
    spdlog::info("wrote {}", *out);
  } else {
    std::cout << text;
  }
}

std::string lower_ext(const fs::path& p) {
  auto e = p.extension().string();
  for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e;
}

void init_logging() {
  auto logger = spdlog::stderr_color_mt("ringkit");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("RINGKIT_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Tree-ring detection, measurement and evaluation"};
  app.require_subcommand(1);

  // detect
  std::string image;
  std::optional<std::string> output;
  std::optional<std::string> pith_arg;
  std::optional<double> scale;
  std::optional<int> harvest_year;
  DetectorConfig dcfg;
  bool no_bg = false;
  auto* detect = app.add_subcommand("detect", "Detect ring boundaries and write an annotation file");
  detect->add_option("image", image, "PNG or JPEG cross-section image")->required();
  detect->add_option("-o,--output", output, "Annotation file (stdout when omitted)");
  detect->add_option("--pith", pith_arg, "Manual pith X,Y in image px");
  detect->add_option("--scale", scale, "Pixels per millimetre")->check(CLI::PositiveNumber);
  detect->add_option("--harvest-year", harvest_year, "Year of the outermost ring");
  detect->add_option("--rays", dcfg.num_rays, "Number of rays")->check(CLI::PositiveNumber);
  detect->add_option("--nodes", dcfg.node_budget, "Nodes per detected ring")->check(CLI::PositiveNumber);
  detect->add_option("--sigma", dcfg.smoothing_sigma, "Profile smoothing sigma (px)");
  detect->add_option("--min-ring-gap", dcfg.min_ring_gap, "Minimum distance between rings (px)");
  detect->add_flag("--no-background-removal", no_bg, "Use the whole image as foreground");
  detect->add_option("--resize-max-width", dcfg.resize_max_width, "Downscale wider images to this width");

  // metrics
  std::string doc_path;
  auto* metrics = app.add_subcommand("metrics", "Per-ring metrics table (CSV) of an annotation file");
  metrics->add_option("annotation", doc_path, "Annotation file")->required();
  metrics->add_option("-o,--output", output, "CSV file (stdout when omitted)");
  metrics->add_option("--scale", scale, "Override pixels per millimetre")->check(CLI::PositiveNumber);

  // measure
  double angle = 0.0;
  std::optional<std::string> origin_arg;
  std::optional<double> max_length;
  auto* measure = app.add_subcommand("measure", "Ring widths along a ray from the pith");
  measure->add_option("annotation", doc_path, "Annotation file")->required();
  measure->add_option("--angle", angle, "Degrees counter-clockwise from east, [0, 360)")->required();
  measure->add_option("--origin", origin_arg, "Ray origin X,Y (pith when omitted)");
  measure->add_option("--max-length", max_length, "Ray length limit in px");
  measure->add_option("--scale", scale, "Override pixels per millimetre")->check(CLI::PositiveNumber);
  measure->add_option("-o,--output", output, "Output file; .pos writes the point list, otherwise CSV");

  // eval
  std::string gt_dir;
  std::string dt_dir;
  double threshold = 0.90;
  auto* eval = app.add_subcommand("eval", "Precision/recall/F-score of detections against ground truth");
  eval->add_option("gt_dir", gt_dir, "Folder of ground-truth annotation files")->required();
  eval->add_option("dt_dir", dt_dir, "Folder of detection annotation files (same names)")->required();
  eval->add_option("--threshold", threshold, "Node fraction needed for a match")->check(CLI::Range(0.0, 1.0));
  eval->add_option("-o,--output", output, "CSV file (stdout when omitted)");

  // convert
  std::string convert_out;
  auto* convert = app.add_subcommand("convert", "Convert an annotation file by output extension (json, csv, html, svg, pos)");
  convert->add_option("annotation", doc_path, "Annotation file")->required();
  convert->add_option("-o,--output", convert_out, "Output file")->required();
  convert->add_option("--angle", angle, "Ray angle for pos and report outputs");
  convert->add_option("--scale", scale, "Override pixels per millimetre")->check(CLI::PositiveNumber);

  // batch
  std::string folder;
  std::string config_path;
  std::optional<std::string> out_dir;
  auto* batch = app.add_subcommand("batch", "Detect and export every PNG/JPEG in a folder");
  batch->add_option("folder", folder, "Image folder")->required();
  batch->add_option("--config", config_path, "YAML configuration")->required();
  batch->add_option("-o,--output", out_dir, "Output folder (overrides output_dir)");

  // serve
  int port = 8765;
  std::string host = "127.0.0.1";
  std::optional<std::string> serve_image;
  std::optional<std::string> serve_doc;
  std::string document_root;
  auto* serve = app.add_subcommand("serve", "Local HTTP+JSON service for the ring editor");
  serve->add_option("document_root", document_root, "Folder with the editor UI (static files)");
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--image", serve_image, "Image to edit");
  serve->add_option("--doc", serve_doc, "Annotation file to start from");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  auto load_doc = [&] {
    auto doc = io::read_annotation(doc_path);
    if (scale) doc.scale = ScaleCalibration{*scale, ScaleSource::Metadata};
    return doc;
  };

  try {
    if (*detect) {
      DetectOptions opts;
      opts.detector = dcfg;
      opts.background_removal = !no_bg;
      if (pith_arg) opts.pith = parse_xy(*pith_arg, "--pith");
      opts.pixels_per_mm = scale;
      opts.harvest_year = harvest_year;
      try {
        opts.detector.check();
      } catch (const Error& e) {
        throw UsageError(e.detail());
      }
      const auto doc = cmd_detect(image, opts);
      spdlog::info("{}: {} rings", image, doc.annual_rings().size());
      emit(output, io::serialize_annotation(doc));
    } else if (*metrics) {
      emit(output, io::write_metrics_csv(compute_ring_metrics(load_doc())));
    } else if (*measure) {
      const auto doc = load_doc();
      RaySpec ray{std::nullopt, angle, max_length};
      if (origin_arg) ray.origin = parse_xy(*origin_arg, "--origin");
      const auto series = measure_ray(doc, ray);
      if (output && lower_ext(*output) == ".pos") {
        emit(output, io::write_pos(series, {fs::path(doc.image_path).stem().string(), "", doc.scale->pixels_per_mm}));
      } else {
        std::string csv = "Ring,Distance (mm),Width (mm)\n";
        for (std::size_t i = 0; i < series.hits.size(); ++i) {
          csv += std::to_string(series.hits[i].ring_index) + "," + io::fixed(series.hits[i].distance, 3) + "," +
                 io::fixed(series.widths[i].width, 3) + "\n";
        }
        emit(output, csv);
      }
    } else if (*eval) {
      emit(output, evaluate_folder(gt_dir, dt_dir, threshold).to_csv());
    } else if (*convert) {
      const auto doc = load_doc();
      const auto ext = lower_ext(convert_out);
      auto ray_series = [&] { return measure_ray(doc, RaySpec{std::nullopt, angle, std::nullopt}); };
      if (ext == ".json") {
        emit(convert_out, io::serialize_annotation(doc));
      } else if (ext == ".csv") {
        emit(convert_out, io::write_metrics_csv(compute_ring_metrics(doc)));
      } else if (ext == ".html") {
        const bool with_ray = convert->count("--angle") > 0;
        emit(convert_out, io::render_report(doc, compute_ring_metrics(doc),
                                            with_ray ? std::optional<RaySeries>(ray_series()) : std::nullopt).html);
      } else if (ext == ".svg") {
        const bool with_ray = convert->count("--angle") > 0 && doc.scale;
        emit(convert_out, io::render_overlay_svg(doc, with_ray ? std::optional<RaySeries>(ray_series()) : std::nullopt));
      } else if (ext == ".pos") {
        const auto s = ray_series();
        emit(convert_out, io::write_pos(s, {fs::path(doc.image_path).stem().string(), "", doc.scale->pixels_per_mm}));
      } else {
        throw UsageError("--output: unsupported extension '" + ext + "' (use .json, .csv, .html, .svg or .pos)");
      }
    } else if (*batch) {
      const auto cfg = io::parse_batch_config(io::read_text_file(config_path));
      std::optional<fs::path> out;
      if (out_dir) out = fs::path(*out_dir);
      const auto result = run_batch(folder, cfg, out);
      for (const auto& e : result.entries) {
        if (e.ok) {
          spdlog::info("{}: ok", e.image.filename().string());
        } else {
          spdlog::error("{}: {}", e.image.filename().string(), e.message);
        }
      }
      std::cout << result.ok_count() << "/" << result.entries.size() << " images ok; summary " << result.summary.string()
                << "\n";
      if (result.ok_count() != result.entries.size()) std::cout << "partial: some images failed\n";
    } else if (*serve) {
      EditorService service;
      if (serve_image) service.load_image(*serve_image);
      if (serve_doc) service.load_document(io::read_annotation(*serve_doc));
      httplib::Server server;
      bind_http(server, service, document_root);
      if (!server.bind_to_port(host, port)) {
        spdlog::error("cannot listen on {}:{}", host, port);
        return kExitUsage;
      }
      std::cout << "listening on http://" << host << ":" << port << "\n" << std::flush;
      server.listen_after_bind();
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitProcessing;
  }
  return 0;
}
