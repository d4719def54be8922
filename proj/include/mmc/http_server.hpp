#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "mmc/job_service.hpp"

namespace httplib {
class Server;
}

namespace mmc::service {

// Routes:
//   POST /api/v1/jobs              -> 202 {"job_id"}
//   GET  /api/v1/jobs/{id}         -> job snapshot
//   GET  /api/v1/jobs/{id}/events  -> text/event-stream, resumable via Last-Event-ID
//   GET  /api/v1/config            -> strategies and backends
//   POST /api/v1/ocr               -> OCR line document for the posted image
//   GET  /                         -> static files, when a directory is given
class HttpServer {
 public:
  explicit HttpServer(JobService& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~HttpServer();

  // Binds and serves on a background thread; port 0 picks a free port.
  // Returns the bound port. Throws std::runtime_error when binding fails.
  int start(const std::string& host, int port);
  // Serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  JobService& service_;
  std::optional<std::filesystem::path> static_dir_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

// SSE framing for one event: "id: N\nevent: TYPE\ndata: JSON\n\n".
std::string sse_frame(const StepEvent& e);

}  // namespace mmc::service
