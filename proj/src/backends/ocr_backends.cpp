#include "mmc/ocr_backend.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "mmc/http_llm.hpp"

namespace mmc::backends {

namespace fs = std::filesystem;

std::string content_type_for(const std::string& name) {
  std::string ext = fs::path(name).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  if (ext == ".tif" || ext == ".tiff") return "image/tiff";
  if (ext == ".pdf") return "application/pdf";
  if (ext == ".json") return "application/json";
  return "application/octet-stream";
}

FixtureOcrBackend::FixtureOcrBackend(fs::path dir) : dir_(std::move(dir)) {}

fs::path FixtureOcrBackend::fixture_path(const std::string& name_hint) const {
  const fs::path hint(name_hint);
  const std::string stem = hint.stem().string();
  // Only a bare file name may select a fixture.
  if (name_hint.empty() || stem.empty() || hint.has_parent_path() || stem == "." || stem == "..") {
    throw BackendError(BackendError::Kind::InvalidRequest, "fixture OCR needs a plain image name, got '" + name_hint + "'");
  }
  return dir_ / (stem + ".json");
}

layout::OcrDocument FixtureOcrBackend::recognize(const std::string&, const std::string&,
                                                 const std::string& name_hint) {
  const fs::path p = fixture_path(name_hint);
  std::ifstream in(p, std::ios::binary);
  if (!in) throw BackendError(BackendError::Kind::InvalidRequest, "no OCR fixture " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return layout::parse_ocr_document(ss.str());
}

HttpOcrBackend::HttpOcrBackend(HttpOcrOptions options, Sleeper sleeper)
    : options_(std::move(options)), sleeper_(std::move(sleeper)) {
  split_url(options_.url);
  options_.retry.validate();
}

layout::OcrDocument HttpOcrBackend::recognize(const std::string& bytes, const std::string& content_type,
                                              const std::string&) {
  if (bytes.empty()) throw BackendError(BackendError::Kind::InvalidRequest, "no image bytes to recognize");
  const UrlParts url = split_url(options_.url);
  const std::string body = with_retry(
      options_.retry,
      [&] {
        httplib::Client client(url.origin);
        const auto secs = options_.timeout.count() / 1000;
        const auto usecs = (options_.timeout.count() % 1000) * 1000;
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        if (!options_.bearer_token.empty()) client.set_bearer_token_auth(options_.bearer_token);
        auto res = client.Post(url.path, bytes, content_type.empty() ? "application/octet-stream" : content_type);
        if (!res) {
          throw BackendError(BackendError::Kind::Transport,
                             "OCR request to " + url.origin + " failed: " + httplib::to_string(res.error()));
        }
        if (res->status < 200 || res->status >= 300) {
          throw BackendError(BackendError::Kind::BadStatus, "OCR endpoint returned HTTP " + std::to_string(res->status),
                             res->status);
        }
        return res->body;
      },
      sleeper_);
  return layout::parse_ocr_document(body);
}

}  // namespace mmc::backends
