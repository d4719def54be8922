#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "mmc/llm.hpp"
#include "mmc/ocr_backend.hpp"

namespace mmc::backends {

enum class BackendKind { Ocr, Llm };
const char* to_string(BackendKind k) noexcept;  // "ocr" | "llm"

inline constexpr const char* kBuiltinEndpoint = "builtin";
inline constexpr const char* kOracleBackendId = "oracle";
inline constexpr const char* kMockBackendId = "mock";

struct BackendDescriptor {
  std::string id;
  BackendKind kind = BackendKind::Llm;
  std::string endpoint;  // URL or "builtin"
  std::vector<std::string> models;  // llm only
  std::string display_name;

  // Connection details, never shown to clients.
  std::string token_env;  // defaults to MMC_TOKEN_<ID>
  int timeout_ms = 60000;
  int max_attempts = 3;
  std::string fixture_dir;  // builtin OCR reads fixtures from here

  bool builtin() const { return endpoint == kBuiltinEndpoint; }
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "my-llm" -> "MMC_TOKEN_MY_LLM"
std::string default_token_env(const std::string& id);

// Backend config file:
//   {"backends": [{"id": str, "kind": "llm"|"ocr", "endpoint": URL|"builtin",
//                  "models": [str], "display_name": str, "token_env": str?,
//                  "timeout_ms": int?, "max_attempts": int?, "fixture_dir": str?}]}
// The builtin "oracle" and "mock" entries come first and cannot be redefined.
class BackendRegistry {
 public:
  static BackendRegistry builtin_only();
  // Relative fixture_dir values resolve against `base_dir`. Throws ConfigError.
  static BackendRegistry from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static BackendRegistry load_file(const std::filesystem::path& path);

  const std::vector<BackendDescriptor>& list() const { return entries_; }
  const BackendDescriptor* find(const std::string& id) const;

  // Throws ConfigError for unknown ids or kind mismatches. The oracle entry
  // has no language model behind it and yields nullptr.
  std::shared_ptr<LlmBackend> make_llm(const std::string& id) const;
  std::shared_ptr<OcrBackend> make_ocr(const std::string& id) const;

  // Public view: no token names, timeouts or local paths.
  nlohmann::json to_json() const;

 private:
  std::vector<BackendDescriptor> entries_;
};

// Holds the registry for MMC_CONFIG (or an explicit path) and reloads it when
// the file's modification time changes. A broken reload keeps the last good one.
class RegistrySource {
 public:
  explicit RegistrySource(std::optional<std::filesystem::path> path);
  static std::optional<std::filesystem::path> environment_path();  // MMC_CONFIG, if set

  std::shared_ptr<const BackendRegistry> current();
  const std::optional<std::filesystem::path>& path() const { return path_; }
  // Message of the last failed load, empty when fine.
  std::string last_error() const;

 private:
  std::optional<std::filesystem::path> path_;
  mutable std::mutex mu_;
  std::shared_ptr<const BackendRegistry> registry_;
  std::optional<std::filesystem::file_time_type> loaded_mtime_;
  std::string last_error_;
};

}  // namespace mmc::backends
