#include "doctest.h"

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "mmc/report_json.hpp"
#include "../support/temp_dir.hpp"

using mmc::testing::TempDir;
using nlohmann::json;

namespace {

const std::string kFixtures = MMC_FIXTURE_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "mmc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = mmc::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string write(const TempDir& dir, const std::string& name, const std::string& text) {
  const auto p = dir / name;
  std::ofstream(p) << text;
  return p.string();
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_SUITE("cli grade") {
  TEST_CASE("correct two-step script exits 0 with two Correct lines") {
    TempDir dir;
    auto r = run({"grade", "--input", write(dir, "ok.txt", "Compute 18+2×3−4\n\n18+2×3 = 18+6 = 24\n24−4 = 20\n")});
    CHECK(r.code == 0);
    CHECK(count(r.out, ": Correct ") == 2);
  }

  TEST_CASE("a wrong step exits 3 and names the step and equality") {
    TempDir dir;
    auto r = run({"grade", "--input", write(dir, "bad.txt", "Compute 18+2×3−4\n\n18+2×3 = 20×3 = 60\n60−4 = 56\n")});
    CHECK(r.code == 3);
    CHECK(r.out.find("Step 1: Incorrect") != std::string::npos);
    CHECK(r.out.find("Equality 1 does not hold") != std::string::npos);
    CHECK(r.out.find("first mistake in step 1") != std::string::npos);
  }

  TEST_CASE("missing file exits 1") {
    auto r = run({"grade", "--input", "/definitely/not/here.txt"});
    CHECK(r.code == 1);
    CHECK_FALSE(r.err.empty());
  }

  TEST_CASE("unsupported steps abort with exit 1") {
    TempDir dir;
    auto r = run({"grade", "--input", write(dir, "x.txt", "Solve\n\nx + 2 = 5\n")});
    CHECK(r.code == 1);
    CHECK(r.out.find("Aborted") != std::string::npos);
  }

  TEST_CASE("json output parses back into a valid report") {
    TempDir dir;
    auto r = run({"grade", "--input", write(dir, "s.txt", "Compute\n\n5 × 4 = 25\n25 + 5 = 30\n"), "--all-steps",
                  "--format", "json"});
    CHECK(r.code == 3);
    auto report = mmc::grading::report_from_json(json::parse(r.out));
    CHECK_FALSE(mmc::grading::check_report_invariants(report));
    CHECK(report.step_verdicts.size() == 2);
    CHECK_FALSE(report.stop_at_first_mistake);
  }

  TEST_CASE("LLM strategies use registry backends") {
    TempDir dir;
    auto r = run({"grade", "--input", write(dir, "ok.txt", "Add\n\n1 + 1 = 2\n"), "--strategy", "pedcot", "--backend",
                  "mock", "--format", "json"});
    CHECK(r.code == 0);
    auto report = mmc::grading::report_from_json(json::parse(r.out));
    CHECK(report.transcript.size() == 3);
    CHECK(report.model_name == "mock");

    CHECK(run({"grade", "--input", dir.path().string() + "/ok.txt", "--strategy", "simple"}).code == 1);
    CHECK(run({"grade", "--input", dir.path().string() + "/ok.txt", "--strategy", "magic"}).code == 1);
  }
}

TEST_SUITE("cli order and layout") {
  TEST_CASE("two-column layout is read column by column") {
    TempDir dir;
    const auto path = write(dir, "cols.json", R"({"page": {"width": 100, "height": 100}, "lines": [
      {"id": 0, "box": [0, 0, 40, 10], "text": "A", "class": "printed"},
      {"id": 1, "box": [60, 0, 40, 10], "text": "B", "class": "printed"},
      {"id": 2, "box": [0, 20, 40, 10], "text": "C", "class": "printed"},
      {"id": 3, "box": [60, 20, 40, 10], "text": "D", "class": "printed"}]})");
    auto r = run({"order", "--lines", path, "--format", "json"});
    CHECK(r.code == 0);
    CHECK(json::parse(r.out)["order"] == json::array({0, 2, 1, 3}));
    auto t = run({"order", "--lines", path});
    CHECK(t.out == "0\tprinted\tA\n2\tprinted\tC\n1\tprinted\tB\n3\tprinted\tD\n");
  }

  TEST_CASE("empty and invalid input") {
    TempDir dir;
    auto e = run({"order", "--lines", write(dir, "e.json", R"({"page": {"width": 10, "height": 10}, "lines": []})")});
    CHECK(e.code == 0);
    CHECK(e.out.empty());
    auto bad = run({"order", "--lines", write(dir, "b.json", R"({"page": {"width": 10, "height": 10}, "lines": [
      {"id": 0, "box": [0, 0, 0, 5], "text": "t", "class": "printed"}]})")});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("InvalidGeometry") != std::string::npos);
    CHECK(run({"order", "--lines", write(dir, "m.json", "{ nope")}).code == 1);
  }

  TEST_CASE("worksheet fixture gives the question and two steps") {
    auto r = run({"layout", "--lines", kFixtures + "/ocr/worksheet4.json"});
    CHECK(r.code == 0);
    json s = json::parse(r.out);
    CHECK(s["problem"] == "Compute 18+2×3−4");
    CHECK(s["steps"] == json::array({"18+2×3 = 24", "24−4 = 20"}));
  }

  TEST_CASE("all-printed fixture warns and has no steps") {
    auto r = run({"layout", "--lines", kFixtures + "/ocr/all_printed.json"});
    CHECK(r.code == 0);
    CHECK(json::parse(r.out)["steps"].empty());
    CHECK(r.err.find("warning") != std::string::npos);
  }

  TEST_CASE("continuation lines merge into one step") {
    auto r = run({"layout", "--lines", kFixtures + "/ocr/merge.json"});
    CHECK(json::parse(r.out)["steps"] == json::array({"18+2×3 = 24"}));
  }
}

TEST_SUITE("cli config") {
  TEST_CASE("lists builtin strategies and backends") {
    auto r = run({"config", "--format", "json"});
    CHECK(r.code == 0);
    json c = json::parse(r.out);
    CHECK(c["strategies"][0]["id"] == "oracle");
    CHECK(c["backends"][0]["id"] == "oracle");
  }

  TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"grade"}).code == 1);
  }
}
