#pragma once

// Local HTTP+JSON editing service. EditorService is transport-free (method,
// path, body, session token in; status, content type, body out) so it can be
// driven directly in tests; the serve command puts it behind an HTTP server.
//
//   POST   /api/session          open the single editing session -> {"token"}
//   DELETE /api/session          close it (token required)
//   GET    /api/doc              current annotation document
//   PUT    /api/doc              replace it (422 lists violations)
//   POST   /api/detect           {"config": {...}, "pith": [x, y], "backgroundRemoval": bool}
//   POST   /api/metrics          metrics rows of the current document
//   POST   /api/measure          {"ray": {"angle", "origin", "maxLength"}}
//   GET    /api/image            the raster file
//   GET    /api/export/csv|pos|report
//   POST   /api/undo, /api/redo
//
// Mutating requests (PUT, detect, undo, redo) must carry the session token in
// X-Session-Token; anything else gets 409.

#include <cstddef>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "image.hpp"
#include "io/annotation_json.hpp"
#include "io/api_json.hpp"
#include "io/batch_config.hpp"
#include "io/image_io.hpp"
#include "io/metrics_csv.hpp"
#include "io/pos.hpp"
#include "io/report.hpp"
#include "measurement.hpp"
#include "pipeline.hpp"

namespace ringkit {

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

inline constexpr std::size_t kHistoryDepth = 256;

class EditorService {
 public:
  EditorService() { reset_history(io::serialize_annotation(doc_)); }

  /// Loads the raster for detection and GET /api/image. The document starts
  /// empty unless one is loaded afterwards.
  void load_image(const std::filesystem::path& path) {
    image_ = io::load_gray(path);
    image_path_ = path;
    image_bytes_ = io::read_text_file(path);
    doc_.image_path = path.filename().string();
    doc_.image_size = {image_->width, image_->height};
    reset_history(io::serialize_annotation(doc_));
  }

  void load_document(const AnnotationDocument& doc) {
    doc_ = doc;
    reset_history(io::serialize_annotation(doc_));
  }

  const AnnotationDocument& document() const { return doc_; }
  std::size_t history_size() const { return history_.size(); }

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body,
                      std::string_view token) {
    std::lock_guard lock(mutex_);
    try {
      return route(method, path, body, token);
    } catch (const Error& e) {
      return error_response(status_for(e.code()), e);
    } catch (const std::exception& e) {
      return json_response(500, {{"error", "Internal"}, {"detail", e.what()}});
    }
  }

 private:
  static int status_for(ErrorCode c) {
    switch (c) {
      case ErrorCode::ParseError:
      case ErrorCode::SchemaError:
      case ErrorCode::VersionError:
      case ErrorCode::ConfigError:
      case ErrorCode::InvalidArgument:
        return 400;
      default:
        return 422;
    }
  }

  static HttpResponse json_response(int status, const io::ordered_json& j) {
    return {status, "application/json", j.dump(2) + "\n"};
  }

  static HttpResponse error_response(int status, const Error& e) {
    return json_response(status, {{"error", std::string(to_string(e.code()))}, {"detail", e.detail()}});
  }

  static HttpResponse not_found() { return json_response(404, {{"error", "NotFound"}}); }

  static nlohmann::json parse_body(std::string_view body) {
    if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return nlohmann::json::object();
    try {
      return nlohmann::json::parse(body.begin(), body.end());
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, e.what());
    }
  }

  void reset_history(std::string snapshot) {
    history_.clear();
    history_.push_back(std::move(snapshot));
    cursor_ = 0;
  }

  void commit(const AnnotationDocument& doc) {
    doc_ = doc;
    history_.erase(history_.begin() + static_cast<std::ptrdiff_t>(cursor_) + 1, history_.end());
    history_.push_back(io::serialize_annotation(doc_));
    if (history_.size() > kHistoryDepth) history_.pop_front();
    cursor_ = history_.size() - 1;
  }

  HttpResponse current() const { return {200, "application/json", history_[cursor_]}; }

  bool holds_session(std::string_view token) const { return session_ && !token.empty() && *session_ == token; }

  HttpResponse conflict() const {
    return json_response(409, {{"error", "SessionConflict"},
                               {"detail", session_ ? "another editor holds the session" : "no editing session is open"}});
  }

  HttpResponse route(std::string_view method, std::string_view path, std::string_view body, std::string_view token) {
    if (path == "/api/session") {
      if (method == "POST") {
        if (session_) return conflict();
        session_ = new_token();
        return json_response(200, {{"token", *session_}});
      }
      if (method == "DELETE") {
        if (!holds_session(token)) return conflict();
        session_.reset();
        return json_response(200, {{"closed", true}});
      }
      return method_not_allowed();
    }
    if (path == "/api/doc") {
      if (method == "GET") return current();
      if (method == "PUT") {
        if (!holds_session(token)) return conflict();
        const auto doc = io::parse_annotation(body);
        const auto violations = validate(doc);
        if (!violations.empty()) {
          io::ordered_json list = io::ordered_json::array();
          for (const auto& v : violations) {
            list.push_back({{"kind", std::string(to_string(v.kind))}, {"shapeId", v.shape_id}, {"otherId", v.other_id}});
          }
          return json_response(422, {{"error", "Violations"}, {"violations", list}});
        }
        commit(doc);
        return current();
      }
      return method_not_allowed();
    }
    if (path == "/api/detect") {
      if (method != "POST") return method_not_allowed();
      if (!holds_session(token)) return conflict();
      if (!image_) throw Error(ErrorCode::MissingImage, "no image loaded");
      const auto req = parse_body(body);
      if (!req.is_object()) throw Error(ErrorCode::SchemaError, "body: expected an object");
      DetectOptions opts;
      opts.detector = io::detector_config_from_json(req.value("config", nlohmann::json()));
      if (req.contains("backgroundRemoval")) {
        if (!req["backgroundRemoval"].is_boolean()) throw Error(ErrorCode::SchemaError, "backgroundRemoval: expected a boolean");
        opts.background_removal = req["backgroundRemoval"].get<bool>();
      }
      if (req.contains("pith") && !req["pith"].is_null()) {
        const auto& p = req["pith"];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
          throw Error(ErrorCode::SchemaError, "pith: expected [x, y]");
        }
        opts.pith = Point2{p[0].get<double>(), p[1].get<double>()};
      }
      if (doc_.scale) opts.pixels_per_mm = doc_.scale->pixels_per_mm;
      opts.harvest_year = doc_.harvest_year;
      auto detected = run_detection(*image_, doc_.image_path, opts);
      if (doc_.scale) detected.scale = doc_.scale;
      commit(detected);
      return current();
    }
    if (path == "/api/metrics") {
      if (method != "POST") return method_not_allowed();
      return json_response(200, io::to_json(compute_ring_metrics(doc_)));
    }
    if (path == "/api/measure") {
      if (method != "POST") return method_not_allowed();
      const auto req = parse_body(body);
      const auto& spec = req.contains("ray") ? req["ray"] : req;
      last_series_ = measure_ray(doc_, io::ray_spec_from_json(spec));
      return json_response(200, io::to_json(*last_series_));
    }
    if (path == "/api/image") {
      if (method != "GET") return method_not_allowed();
      if (!image_) return not_found();
      return {200, image_content_type(), image_bytes_};
    }
    if (path.substr(0, 12) == "/api/export/") {
      if (method != "GET") return method_not_allowed();
      const auto what = path.substr(12);
      if (what == "csv") return {200, "text/csv", io::write_metrics_csv(compute_ring_metrics(doc_))};
      if (what == "pos") {
        if (!last_series_) throw Error(ErrorCode::EmptySeries, "no ray has been measured");
        const auto stem = std::filesystem::path(doc_.image_path).stem().string();
        return {200, "text/plain", io::write_pos(*last_series_, {stem, "", doc_.scale ? doc_.scale->pixels_per_mm : 1.0})};
      }
      if (what == "report") return {200, "text/html", io::render_report(doc_, compute_ring_metrics(doc_), last_series_).html};
      return not_found();
    }
    if (path == "/api/undo" || path == "/api/redo") {
      if (method != "POST") return method_not_allowed();
      if (!holds_session(token)) return conflict();
      const bool undo = path == "/api/undo";
      if (undo ? cursor_ == 0 : cursor_ + 1 >= history_.size()) {
        return json_response(422, {{"error", undo ? "NothingToUndo" : "NothingToRedo"}});
      }
      cursor_ = undo ? cursor_ - 1 : cursor_ + 1;
      doc_ = io::parse_annotation(history_[cursor_]);
      return current();
    }
    return not_found();
  }

  static HttpResponse method_not_allowed() { return json_response(405, {{"error", "MethodNotAllowed"}}); }

  std::string image_content_type() const {
    auto ext = image_path_.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    return "application/octet-stream";
  }

  std::string new_token() {
    static constexpr char kHex[] = "0123456789abcdef";
    std::uniform_int_distribution<int> d(0, 15);
    std::string t;
    for (int i = 0; i < 32; ++i) t += kHex[d(rng_)];
    return t;
  }

  std::mutex mutex_;
  AnnotationDocument doc_;
  std::deque<std::string> history_;
  std::size_t cursor_ = 0;
  std::optional<std::string> session_;
  std::optional<GrayImage> image_;
  std::filesystem::path image_path_;
  std::string image_bytes_;
  std::optional<RaySeries> last_series_;
  std::mt19937_64 rng_{std::random_device{}()};
};

}  // namespace ringkit
