#pragma once

#include <chrono>
#include <filesystem>
#include <string>

#include "mmc/llm.hpp"
#include "mmc/ocr_document.hpp"
#include "mmc/retry.hpp"

namespace mmc::backends {

// Stage 1 recognizer: image bytes in, classified text lines out.
// Errors: BackendError (Transport, BadStatus, MalformedResponse) and
// layout::OcrFormatError (MalformedResponse, UnknownClass).
class OcrBackend {
 public:
  virtual ~OcrBackend() = default;

  // `name_hint` is the image reference the caller knows the image by.
  virtual layout::OcrDocument recognize(const std::string& bytes, const std::string& content_type,
                                        const std::string& name_hint) = 0;
};

// Reads pre-authored line documents: `<dir>/<stem of name_hint>.json`.
class FixtureOcrBackend : public OcrBackend {
 public:
  explicit FixtureOcrBackend(std::filesystem::path dir);

  layout::OcrDocument recognize(const std::string& bytes, const std::string& content_type,
                                const std::string& name_hint) override;

  std::filesystem::path fixture_path(const std::string& name_hint) const;

 private:
  std::filesystem::path dir_;
};

struct HttpOcrOptions {
  std::string url;
  std::string bearer_token;
  std::chrono::milliseconds timeout{60000};
  RetryPolicy retry;
};

// POSTs the raw image with its content type; the reply is the line document.
class HttpOcrBackend : public OcrBackend {
 public:
  explicit HttpOcrBackend(HttpOcrOptions options, Sleeper sleeper = real_sleep);

  layout::OcrDocument recognize(const std::string& bytes, const std::string& content_type,
                                const std::string& name_hint) override;

 private:
  HttpOcrOptions options_;
  Sleeper sleeper_;
};

// "page.png" -> "image/png"; unknown extensions give application/octet-stream.
std::string content_type_for(const std::string& name);

}  // namespace mmc::backends
