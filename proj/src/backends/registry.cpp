#include "mmc/registry.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "mmc/http_llm.hpp"

namespace mmc::backends {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(BackendKind k) noexcept { return k == BackendKind::Ocr ? "ocr" : "llm"; }

std::string default_token_env(const std::string& id) {
  std::string out = "MMC_TOKEN_";
  for (unsigned char c : id) out += std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_';
  return out;
}

namespace {

std::vector<BackendDescriptor> builtins() {
  BackendDescriptor oracle;
  oracle.id = kOracleBackendId;
  oracle.kind = BackendKind::Llm;
  oracle.endpoint = kBuiltinEndpoint;
  oracle.display_name = "Exact arithmetic (no model)";

  BackendDescriptor mock;
  mock.id = kMockBackendId;
  mock.kind = BackendKind::Llm;
  mock.endpoint = kBuiltinEndpoint;
  mock.models = {"mock"};
  mock.display_name = "Offline mock model";
  return {oracle, mock};
}

template <typename T>
T field(const json& e, const char* key, const std::string& where, T fallback) {
  if (!e.contains(key)) return fallback;
  try {
    return e.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": field '" + key + "' has the wrong type");
  }
}

std::string token_for(const BackendDescriptor& d) {
  const std::string name = d.token_env.empty() ? default_token_env(d.id) : d.token_env;
  const char* v = std::getenv(name.c_str());
  return v ? std::string(v) : std::string{};
}

RetryPolicy policy_for(const BackendDescriptor& d) {
  RetryPolicy p;
  p.max_attempts = d.max_attempts;
  return p;
}

}  // namespace

BackendRegistry BackendRegistry::builtin_only() {
  BackendRegistry r;
  r.entries_ = builtins();
  return r;
}

BackendRegistry BackendRegistry::from_json(const json& j, const fs::path& base_dir) {
  BackendRegistry r = builtin_only();
  if (!j.is_object()) throw ConfigError("backend config must be a JSON object");
  if (!j.contains("backends")) return r;
  if (!j["backends"].is_array()) throw ConfigError("'backends' must be an array");

  std::set<std::string> seen;
  for (const auto& d : r.entries_) seen.insert(d.id);

  std::size_t n = 0;
  for (const auto& e : j["backends"]) {
    const std::string where = "backends[" + std::to_string(n++) + "]";
    if (!e.is_object()) throw ConfigError(where + " must be an object");
    BackendDescriptor d;
    d.id = field<std::string>(e, "id", where, "");
    if (d.id.empty()) throw ConfigError(where + ": missing id");
    if (!seen.insert(d.id).second) throw ConfigError("duplicate backend id '" + d.id + "'");

    const std::string kind = field<std::string>(e, "kind", where, "");
    if (kind == "llm") d.kind = BackendKind::Llm;
    else if (kind == "ocr") d.kind = BackendKind::Ocr;
    else throw ConfigError(where + ": kind must be \"llm\" or \"ocr\"");

    d.endpoint = field<std::string>(e, "endpoint", where, "");
    d.models = field<std::vector<std::string>>(e, "models", where, {});
    d.display_name = field<std::string>(e, "display_name", where, d.id);
    d.token_env = field<std::string>(e, "token_env", where, "");
    d.timeout_ms = field<int>(e, "timeout_ms", where, 60000);
    d.max_attempts = field<int>(e, "max_attempts", where, 3);
    d.fixture_dir = field<std::string>(e, "fixture_dir", where, "");
    if (d.timeout_ms <= 0) throw ConfigError(where + ": timeout_ms must be positive");
    if (d.max_attempts < 1) throw ConfigError(where + ": max_attempts must be >= 1");

    if (d.builtin()) {
      if (d.kind == BackendKind::Llm) throw ConfigError(where + ": builtin LLM backends are reserved");
      if (d.fixture_dir.empty()) throw ConfigError(where + ": builtin OCR needs fixture_dir");
      fs::path dir(d.fixture_dir);
      if (dir.is_relative() && !base_dir.empty()) d.fixture_dir = (base_dir / dir).lexically_normal().string();
    } else {
      try {
        split_url(d.endpoint);
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(where + ": " + ex.what());
      }
    }
    if (d.kind == BackendKind::Llm && d.models.empty()) throw ConfigError(where + ": LLM backend lists no models");
    if (d.kind == BackendKind::Ocr) d.models.clear();
    r.entries_.push_back(std::move(d));
  }
  return r;
}

BackendRegistry BackendRegistry::load_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read backend config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw ConfigError("backend config " + path.string() + " is not valid JSON");
  return from_json(j, path.parent_path());
}

const BackendDescriptor* BackendRegistry::find(const std::string& id) const {
  for (const auto& d : entries_) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

std::shared_ptr<LlmBackend> BackendRegistry::make_llm(const std::string& id) const {
  const auto* d = find(id);
  if (!d) throw ConfigError("unknown backend '" + id + "'");
  if (d->kind != BackendKind::Llm) throw ConfigError("backend '" + id + "' is not a language model");
  if (d->id == kOracleBackendId) return nullptr;
  if (d->id == kMockBackendId) return std::make_shared<OfflineMockLlm>();
  HttpLlmOptions o;
  o.url = d->endpoint;
  o.bearer_token = token_for(*d);
  o.timeout = std::chrono::milliseconds(d->timeout_ms);
  o.retry = policy_for(*d);
  return std::make_shared<HttpLlmBackend>(std::move(o));
}

std::shared_ptr<OcrBackend> BackendRegistry::make_ocr(const std::string& id) const {
  const auto* d = find(id);
  if (!d) throw ConfigError("unknown backend '" + id + "'");
  if (d->kind != BackendKind::Ocr) throw ConfigError("backend '" + id + "' is not an OCR backend");
  if (d->builtin()) return std::make_shared<FixtureOcrBackend>(d->fixture_dir);
  HttpOcrOptions o;
  o.url = d->endpoint;
  o.bearer_token = token_for(*d);
  o.timeout = std::chrono::milliseconds(d->timeout_ms);
  o.retry = policy_for(*d);
  return std::make_shared<HttpOcrBackend>(std::move(o));
}

json BackendRegistry::to_json() const {
  json out = json::array();
  for (const auto& d : entries_) {
    out.push_back({{"id", d.id},
                   {"kind", to_string(d.kind)},
                   {"endpoint", d.builtin() ? kBuiltinEndpoint : d.endpoint},
                   {"models", d.models},
                   {"display_name", d.display_name}});
  }
  return out;
}

RegistrySource::RegistrySource(std::optional<fs::path> path) : path_(std::move(path)) {
  registry_ = std::make_shared<const BackendRegistry>(BackendRegistry::builtin_only());
  if (path_) {
    // A bad file at startup is fatal; later reload failures are not.
    registry_ = std::make_shared<const BackendRegistry>(BackendRegistry::load_file(*path_));
    std::error_code ec;
    const auto t = fs::last_write_time(*path_, ec);
    if (!ec) loaded_mtime_ = t;
  }
}

std::optional<fs::path> RegistrySource::environment_path() {
  const char* p = std::getenv("MMC_CONFIG");
  if (!p || !*p) return std::nullopt;
  return fs::path(p);
}

std::shared_ptr<const BackendRegistry> RegistrySource::current() {
  std::lock_guard lock(mu_);
  if (!path_) return registry_;
  std::error_code ec;
  const auto t = fs::last_write_time(*path_, ec);
  if (ec) {
    last_error_ = "cannot stat " + path_->string() + ": " + ec.message();
    return registry_;
  }
  if (loaded_mtime_ && *loaded_mtime_ == t) return registry_;
  try {
    registry_ = std::make_shared<const BackendRegistry>(BackendRegistry::load_file(*path_));
    last_error_.clear();
  } catch (const ConfigError& e) {
    last_error_ = e.what();
  }
  loaded_mtime_ = t;
  return registry_;
}

std::string RegistrySource::last_error() const {
  std::lock_guard lock(mu_);
  return last_error_;
}

}  // namespace mmc::backends
