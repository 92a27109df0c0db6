#pragma once

// Binds an EditorService to an httplib server. Static files (the editor UI)
// are served from document_root when one is given.

#include <filesystem>
#include <string>

#include <httplib.h>

#include "service.hpp"

namespace ringkit {

inline void bind_http(httplib::Server& server, EditorService& service,
                      const std::filesystem::path& document_root = {}) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto out = service.handle(req.method, req.path, req.body, req.get_header_value("X-Session-Token"));
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  const std::string api = R"(/api/.*)";
  server.Get(api, forward);
  server.Put(api, forward);
  server.Post(api, forward);
  server.Delete(api, forward);
  if (!document_root.empty() && !server.set_mount_point("/", document_root.string())) {
    throw Error(ErrorCode::IoError, "document root is not a directory: '" + document_root.string() + "'");
  }
}

}  // namespace ringkit
