#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "mmc/http_llm.hpp"
#include "mmc/ocr_backend.hpp"
#include "mmc/registry.hpp"
#include "../support/fake_http.hpp"
#include "../support/temp_dir.hpp"

using namespace mmc::backends;
using mmc::testing::FakeHttpServer;
using mmc::testing::TempDir;
using nlohmann::json;
using std::chrono::milliseconds;

namespace {

const std::string kFixtures = MMC_FIXTURE_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<ChatMessage> one_message(const std::string& text = "hello") { return {{Role::User, text}}; }

HttpLlmOptions fast_options(const std::string& url, int attempts = 3) {
  HttpLlmOptions o;
  o.url = url;
  o.timeout = milliseconds(2000);
  o.retry.max_attempts = attempts;
  o.retry.backoff_base = milliseconds(1);
  return o;
}

struct SleepLog {
  std::vector<milliseconds> delays;
  Sleeper sleeper() {
    return [this](milliseconds d) { delays.push_back(d); };
  }
};

}  // namespace

TEST_SUITE("retry policy") {
  TEST_CASE("delays grow geometrically up to the cap") {
    RetryPolicy p;
    p.backoff_base = milliseconds(100);
    p.backoff_factor = 2.0;
    CHECK(p.delay_after(1) == milliseconds(100));
    CHECK(p.delay_after(2) == milliseconds(200));
    CHECK(p.delay_after(3) == milliseconds(400));
    CHECK(p.delay_after(10) == milliseconds(30000));  // 51200 capped
    CHECK(p.delay_after(1000) == milliseconds(30000));
  }

  TEST_CASE("property: delays are non-decreasing and bounded") {
    std::mt19937 rng(5);
    for (int i = 0; i < 200; ++i) {
      RetryPolicy p;
      p.backoff_base = milliseconds(std::uniform_int_distribution<int>(0, 5000)(rng));
      p.backoff_factor = std::uniform_real_distribution<double>(1.0, 4.0)(rng);
      milliseconds prev{0};
      for (int a = 1; a <= 40; ++a) {
        const auto d = p.delay_after(a);
        CHECK(d >= prev);
        CHECK(d <= RetryPolicy::kMaxDelay);
        prev = d;
      }
    }
  }

  TEST_CASE("invalid policies") {
    RetryPolicy p;
    p.max_attempts = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.max_attempts = 1;
    p.backoff_factor = 0.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }

  TEST_CASE("retryable failures are retried until success") {
    RetryPolicy p;
    p.max_attempts = 3;
    p.backoff_base = milliseconds(10);
    p.backoff_factor = 3;
    SleepLog log;
    int calls = 0;
    const int v = with_retry(
        p,
        [&] {
          if (++calls < 3) throw BackendError(BackendError::Kind::BadStatus, "busy", 500);
          return 7;
        },
        log.sleeper());
    CHECK(v == 7);
    CHECK(calls == 3);
    CHECK(log.delays == std::vector<milliseconds>{milliseconds(10), milliseconds(30)});
  }

  TEST_CASE("client errors are not retried") {
    RetryPolicy p;
    int calls = 0;
    SleepLog log;
    CHECK_THROWS_AS(with_retry(
                        p,
                        [&]() -> int {
                          ++calls;
                          throw BackendError(BackendError::Kind::BadStatus, "denied", 401);
                        },
                        log.sleeper()),
                    BackendError);
    CHECK(calls == 1);
    CHECK(log.delays.empty());
  }
}

TEST_SUITE("scripted mock") {
  TEST_CASE("replays its queue once, then fails") {
    ScriptedMockLlm mock({"A", "B"});
    CHECK(mock.chat_complete(one_message(), "m", 0) == "A");
    CHECK(mock.chat_complete(one_message(), "m", 0) == "B");
    try {
      mock.chat_complete(one_message(), "m", 0);
      FAIL("expected Exhausted");
    } catch (const BackendError& e) {
      CHECK(e.kind() == BackendError::Kind::Exhausted);
      CHECK_FALSE(e.retryable());
    }
    CHECK(mock.call_count() == 3);
  }

  TEST_CASE("empty user messages are rejected") {
    ScriptedMockLlm mock({"A"});
    CHECK_THROWS_AS(mock.chat_complete({}, "m", 0), BackendError);
    CHECK_THROWS_AS(mock.chat_complete(one_message(""), "m", 0), BackendError);
  }
}

TEST_SUITE("http llm") {
  TEST_CASE("url splitting") {
    auto u = split_url("http://localhost:8000/v1/chat/completions");
    CHECK(u.origin == "http://localhost:8000");
    CHECK(u.path == "/v1/chat/completions");
    CHECK(split_url("https://example.org").path == "/");
    CHECK_THROWS(split_url("localhost:8000"));
    CHECK_THROWS(split_url("ftp://x/y"));
  }

  TEST_CASE("request body and successful reply") {
    FakeHttpServer srv({{200, FakeHttpServer::chat_reply("VERDICT: CORRECT")}});
    auto o = fast_options(srv.url("/v1/chat/completions"));
    o.bearer_token = "s3cret";
    HttpLlmBackend llm(o);
    CHECK(llm.chat_complete({{Role::System, "sys"}, {Role::User, "grade this"}}, "small", 0.25) ==
          "VERDICT: CORRECT");
    const auto seen = srv.seen();
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].path == "/v1/chat/completions");
    CHECK(seen[0].authorization == "Bearer s3cret");
    const json body = json::parse(seen[0].body);
    CHECK(body["model"] == "small");
    CHECK(body["temperature"] == 0.25);
    REQUIRE(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["content"] == "grade this");
  }

  TEST_CASE("two server errors then success on the third attempt") {
    FakeHttpServer srv({{500, "{}"}, {500, "{}"}, {200, FakeHttpServer::chat_reply("ok")}});
    SleepLog log;
    HttpLlmBackend llm(fast_options(srv.url("/chat"), 3), log.sleeper());
    CHECK(llm.chat_complete(one_message(), "m", 0) == "ok");
    CHECK(srv.seen().size() == 3);
    CHECK(log.delays.size() == 2);
  }

  TEST_CASE("401 is a bad status and is not retried") {
    FakeHttpServer srv({{401, "{}"}, {200, FakeHttpServer::chat_reply("late")}});
    HttpLlmBackend llm(fast_options(srv.url("/chat"), 3), [](milliseconds) {});
    try {
      llm.chat_complete(one_message(), "m", 0);
      FAIL("expected BadStatus");
    } catch (const BackendError& e) {
      CHECK(e.kind() == BackendError::Kind::BadStatus);
      CHECK(e.status() == 401);
    }
    CHECK(srv.seen().size() == 1);
  }

  TEST_CASE("malformed replies") {
    FakeHttpServer srv({{200, "{\"choices\": []}"}, {200, "not json"}});
    HttpLlmBackend llm(fast_options(srv.url("/chat"), 2), [](milliseconds) {});
    try {
      llm.chat_complete(one_message(), "m", 0);
      FAIL("expected MalformedResponse");
    } catch (const BackendError& e) {
      CHECK(e.kind() == BackendError::Kind::MalformedResponse);
    }
    CHECK(srv.seen().size() == 2);
  }

  TEST_CASE("connection refused is a transport error") {
    int port;
    {
      FakeHttpServer srv({});
      port = std::stoi(srv.url("").substr(std::string("http://127.0.0.1:").size()));
    }
    HttpLlmBackend llm(fast_options("http://127.0.0.1:" + std::to_string(port) + "/chat", 2), [](milliseconds) {});
    try {
      llm.chat_complete(one_message(), "m", 0);
      FAIL("expected Transport");
    } catch (const BackendError& e) {
      CHECK(e.kind() == BackendError::Kind::Transport);
    }
  }
}

TEST_SUITE("ocr backends") {
  TEST_CASE("fixture worksheet gives four classified lines") {
    FixtureOcrBackend ocr(kFixtures + "/ocr");
    auto doc = ocr.recognize("", "image/png", "worksheet4.png");
    REQUIRE(doc.lines.size() == 4);
    CHECK(doc.page.width == 800);
    using mmc::layout::LineClass;
    CHECK(doc.lines[0].cls == LineClass::Printed);
    CHECK(doc.lines[1].cls == LineClass::Equation);
    CHECK(doc.lines[2].cls == LineClass::Printed);
    CHECK(doc.lines[3].cls == LineClass::Handwritten);
    CHECK(doc.lines[3].text == "18+2×3 = 24");
  }

  TEST_CASE("fixture round trip reproduces the file modulo field order and whitespace") {
    for (const char* name : {"worksheet4", "all_printed", "merge", "mistake"}) {
      CAPTURE(name);
      const std::string text = slurp(kFixtures + "/ocr/" + name + ".json");
      FixtureOcrBackend ocr(kFixtures + "/ocr");
      const auto doc = ocr.recognize("", "", std::string(name) + ".jpg");
      CHECK(mmc::layout::to_json(doc) == json::parse(text));
    }
  }

  TEST_CASE("missing lines and unknown classes") {
    FixtureOcrBackend ocr(kFixtures + "/ocr");
    try {
      ocr.recognize("", "", "no_lines.png");
      FAIL("expected MalformedResponse");
    } catch (const mmc::layout::OcrFormatError& e) {
      CHECK(e.kind() == mmc::layout::OcrFormatError::Kind::MalformedResponse);
    }
    try {
      ocr.recognize("", "", "unknown_class.png");
      FAIL("expected UnknownClass");
    } catch (const mmc::layout::OcrFormatError& e) {
      CHECK(e.kind() == mmc::layout::OcrFormatError::Kind::UnknownClass);
      CHECK(e.value() == "footnote");
    }
  }

  TEST_CASE("fixture names cannot leave the directory") {
    FixtureOcrBackend ocr(kFixtures + "/ocr");
    CHECK_THROWS_AS(ocr.recognize("", "", "../layouts/01_single_column.json"), BackendError);
    CHECK_THROWS_AS(ocr.recognize("", "", ""), BackendError);
    CHECK_THROWS_AS(ocr.recognize("", "", "absent.png"), BackendError);
  }

  TEST_CASE("http ocr posts the bytes with their content type") {
    FakeHttpServer srv({{200, slurp(kFixtures + "/ocr/worksheet4.json")}});
    HttpOcrOptions o;
    o.url = srv.url("/ocr");
    HttpOcrBackend ocr(o);
    const std::string bytes("\x89PNG\r\n", 6);
    auto doc = ocr.recognize(bytes, "image/png", "page.png");
    CHECK(doc.lines.size() == 4);
    const auto seen = srv.seen();
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].body == bytes);
    CHECK(seen[0].content_type == "image/png");
  }

  TEST_CASE("content types from names") {
    CHECK(content_type_for("a.PNG") == "image/png");
    CHECK(content_type_for("b.jpeg") == "image/jpeg");
    CHECK(content_type_for("c") == "application/octet-stream");
  }
}

TEST_SUITE("registry") {
  TEST_CASE("builtins are always present and first") {
    auto r = BackendRegistry::builtin_only();
    REQUIRE(r.list().size() == 2);
    CHECK(r.list()[0].id == "oracle");
    CHECK(r.list()[1].id == "mock");
    CHECK(r.make_llm("oracle") == nullptr);
    CHECK(r.make_llm("mock") != nullptr);
    CHECK(BackendRegistry::from_json(json::object()).find("oracle"));
  }

  TEST_CASE("one endpoint with two models") {
    json cfg = json::parse(R"({"backends": [
      {"id": "local", "kind": "llm", "endpoint": "http://127.0.0.1:9/v1/chat/completions",
       "models": ["small", "large"], "display_name": "Local server"}]})");
    auto r = BackendRegistry::from_json(cfg);
    REQUIRE(r.list().size() == 3);
    const auto& d = r.list()[2];
    CHECK(d.id == "local");
    CHECK(d.kind == BackendKind::Llm);
    CHECK(d.models == std::vector<std::string>{"small", "large"});
    CHECK(d.display_name == "Local server");
    const json pub = r.to_json();
    CHECK(pub[2]["models"] == json::array({"small", "large"}));
    CHECK_FALSE(pub[2].contains("token_env"));
  }

  TEST_CASE("configuration errors") {
    auto load = [](const char* text) { return BackendRegistry::from_json(json::parse(text)); };
    CHECK_THROWS_AS(load(R"({"backends": [{"id": "a", "kind": "llm", "endpoint": "http://x/", "models": ["m"]},
                                          {"id": "a", "kind": "llm", "endpoint": "http://y/", "models": ["m"]}]})"),
                    ConfigError);
    CHECK_THROWS_AS(load(R"({"backends": [{"id": "oracle", "kind": "llm", "endpoint": "http://x/", "models": ["m"]}]})"),
                    ConfigError);
    CHECK_THROWS_AS(load(R"({"backends": [{"id": "a", "kind": "vision", "endpoint": "http://x/"}]})"), ConfigError);
    CHECK_THROWS_AS(load(R"({"backends": [{"id": "a", "kind": "llm", "endpoint": "http://x/", "models": []}]})"),
                    ConfigError);
    CHECK_THROWS_AS(load(R"({"backends": [{"id": "a", "kind": "llm", "endpoint": "nowhere", "models": ["m"]}]})"),
                    ConfigError);
    CHECK_THROWS_AS(load(R"({"backends": [{"id": "a", "kind": "ocr", "endpoint": "builtin"}]})"), ConfigError);
    CHECK_THROWS_AS(load(R"({"backends": {}})"), ConfigError);
  }

  TEST_CASE("token environment names") {
    CHECK(default_token_env("my-llm") == "MMC_TOKEN_MY_LLM");
    CHECK(default_token_env("gpt4") == "MMC_TOKEN_GPT4");
  }

  TEST_CASE("tokens are read from the environment per endpoint") {
    FakeHttpServer srv({{200, FakeHttpServer::chat_reply("VERDICT: CORRECT")}});
    json cfg{{"backends", {{{"id", "tok-test"}, {"kind", "llm"}, {"endpoint", srv.url("/v1/chat")},
                            {"models", {"m"}}}}}};
    ::setenv("MMC_TOKEN_TOK_TEST", "abc123", 1);
    auto llm = BackendRegistry::from_json(cfg).make_llm("tok-test");
    ::unsetenv("MMC_TOKEN_TOK_TEST");
    llm->chat_complete(one_message(), "m", 0);
    CHECK(srv.seen().at(0).authorization == "Bearer abc123");
  }

  TEST_CASE("builtin OCR fixture directories resolve against the config file") {
    TempDir dir;
    std::filesystem::create_directories(dir / "fx");
    std::filesystem::copy_file(kFixtures + "/ocr/worksheet4.json", dir / "fx" / "worksheet4.json");
    {
      std::ofstream(dir / "cfg.json") << R"({"backends": [{"id": "fixture", "kind": "ocr", "endpoint": "builtin", "fixture_dir": "fx"}]})";
    }
    auto r = BackendRegistry::load_file(dir / "cfg.json");
    auto ocr = r.make_ocr("fixture");
    CHECK(ocr->recognize("", "", "worksheet4.png").lines.size() == 4);
    CHECK_THROWS_AS(r.make_ocr("mock"), ConfigError);
    CHECK_THROWS_AS(r.make_llm("fixture"), ConfigError);
    CHECK_THROWS_AS(r.make_llm("nope"), ConfigError);
  }

  TEST_CASE("source reloads when the file changes") {
    TempDir dir;
    const auto path = dir / "cfg.json";
    auto write = [&](const char* models) {
      std::ofstream(path) << R"({"backends": [{"id": "srv", "kind": "llm", "endpoint": "http://127.0.0.1:9/c", "models": )"
                          << models << "}]}";
    };
    write(R"(["a"])");
    RegistrySource src(path);
    CHECK(src.current()->find("srv")->models == std::vector<std::string>{"a"});

    write(R"(["a", "b"])");
    std::filesystem::last_write_time(path, std::filesystem::last_write_time(path) + std::chrono::seconds(5));
    CHECK(src.current()->find("srv")->models == std::vector<std::string>{"a", "b"});

    // A broken edit keeps the last good registry and reports the problem.
    std::ofstream(path) << "{ broken";
    std::filesystem::last_write_time(path, std::filesystem::last_write_time(path) + std::chrono::seconds(10));
    CHECK(src.current()->find("srv")->models.size() == 2);
    CHECK_FALSE(src.last_error().empty());
  }

  TEST_CASE("a broken file at startup is an error") {
    TempDir dir;
    std::ofstream(dir / "bad.json") << "[]";
    CHECK_THROWS_AS(RegistrySource(dir / "bad.json"), ConfigError);
    CHECK_THROWS_AS(RegistrySource(dir / "missing.json"), ConfigError);
  }
}
