#include "mmc/http_server.hpp"

#include <stdexcept>

#include "httplib.h"

namespace mmc::service {

using nlohmann::json;

namespace {

constexpr std::chrono::milliseconds kPollWait{1000};
constexpr int kHeartbeatPolls = 15;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, json{{"error", message}});
}

std::uint64_t parse_event_id(const std::string& text) {
  if (text.empty() || text.size() > 19) return 0;
  for (char c : text) {
    if (c < '0' || c > '9') return 0;
  }
  return std::stoull(text);
}

}  // namespace

std::string sse_frame(const StepEvent& e) {
  // json::dump never emits raw newlines, so one data line suffices.
  return "id: " + std::to_string(e.sequence_no) + "\nevent: " + event_type(e.payload) + "\ndata: " +
         to_json(e).dump() + "\n\n";
}

HttpServer::HttpServer(JobService& service, std::optional<std::filesystem::path> static_dir)
    : service_(service), static_dir_(std::move(static_dir)), server_(std::make_unique<httplib::Server>()) {
  // Each open event stream holds a thread.
  server_->new_task_queue = [] { return new httplib::ThreadPool(48); };
  install_routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::install_routes() {
  auto& s = *server_;

  s.Post("/api/v1/jobs", [this](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) return send_error(res, 400, "request body is not valid JSON");
    try {
      send_json(res, 202, json{{"job_id", service_.create_job(body)}});
    } catch (const ValidationError& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 503, e.what());
    }
  });

  s.Get(R"(/api/v1/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    auto snap = service_.snapshot(req.matches[1]);
    if (!snap) return send_error(res, 404, "no job " + std::string(req.matches[1]));
    send_json(res, 200, *snap);
  });

  s.Get(R"(/api/v1/jobs/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!service_.job(id)) return send_error(res, 404, "no job " + id);
    std::uint64_t cursor = parse_event_id(req.get_header_value("Last-Event-ID"));
    if (req.has_param("last_event_id")) cursor = parse_event_id(req.get_param_value("last_event_id"));

    res.set_header("Cache-Control", "no-cache");
    res.set_header("X-Accel-Buffering", "no");
    auto idle = std::make_shared<int>(0);
    res.set_chunked_content_provider(
        "text/event-stream", [this, id, cursor, idle](size_t, httplib::DataSink& sink) mutable {
          if (service_.stopping()) {
            sink.done();
            return true;
          }
          auto events = service_.events_after(id, cursor, kPollWait);
          if (!events) {  // evicted while streaming
            sink.done();
            return true;
          }
          if (events->empty()) {
            if (++*idle >= kHeartbeatPolls) {
              *idle = 0;
              const std::string beat = ": keep-alive\n\n";
              if (!sink.write(beat.data(), beat.size())) return false;
            }
            return sink.is_writable();
          }
          *idle = 0;
          for (const auto& e : *events) {
            const std::string frame = sse_frame(e);
            if (!sink.write(frame.data(), frame.size())) return false;
            cursor = e.sequence_no;
            if (std::holds_alternative<Completed>(e.payload)) {
              sink.done();
              return true;
            }
          }
          return true;
        });
  });

  s.Get("/api/v1/config", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, service_.config_json());
  });

  s.Post("/api/v1/ocr", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string backend = req.get_param_value("backend");
    const std::string name = req.get_param_value("name");
    std::string type = req.get_header_value("Content-Type");
    try {
      send_json(res, 200, layout::to_json(service_.recognize(req.body, type, backend, name)));
    } catch (const ValidationError& e) {
      send_error(res, 400, e.what());
    } catch (const backends::BackendError& e) {
      send_error(res, e.kind() == backends::BackendError::Kind::InvalidRequest ? 400 : 502, e.what());
    } catch (const layout::OcrFormatError& e) {
      send_error(res, 502, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  });

  if (static_dir_ && std::filesystem::is_directory(*static_dir_)) {
    s.set_mount_point("/", static_dir_->string());
  }
}

int HttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpServer::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace mmc::service
