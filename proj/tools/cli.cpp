#include "cli.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <pthread.h>

#include "CLI11.hpp"

#include "mmc/grading.hpp"
#include "mmc/http_server.hpp"
#include "mmc/job_service.hpp"
#include "mmc/layout.hpp"
#include "mmc/ocr_document.hpp"
#include "mmc/registry.hpp"
#include "mmc/report_json.hpp"
#include "mmc/script_format.hpp"

namespace mmc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_report_text(const grading::GradingReport& r, std::ostream& out) {
  out << "Problem: " << r.script.problem << "\n";
  for (const auto& v : r.step_verdicts) {
    const auto& step = r.script.steps[static_cast<std::size_t>(v.step_index - 1)];
    out << "Step " << v.step_index << ": " << grading::to_string(v.verdict) << "  | " << step << "\n";
    if (!v.comment.empty()) out << "    " << v.comment << "\n";
  }
  const std::size_t total = r.script.steps.size();
  if (r.step_verdicts.size() < total) {
    out << "(" << total - r.step_verdicts.size() << " later step(s) not graded)\n";
  }
  out << "Result: " << grading::to_string(r.overall);
  if (r.first_mistake_index) out << " (first mistake in step " << *r.first_mistake_index << ")";
  if (!r.abort_reason.empty()) out << " (" << r.abort_reason << ")";
  out << "\n";
}

int exit_code_for(const grading::GradingReport& r) {
  switch (r.overall) {
    case grading::Overall::AllCorrect: return kExitAllCorrect;
    case grading::Overall::MistakeFound: return kExitMistakeFound;
    case grading::Overall::Aborted: return kExitError;
  }
  return kExitError;
}

struct GradeArgs {
  std::string input;
  std::string strategy = grading::kStrategyOracle;
  std::string backend;
  std::string model;
  bool all_steps = false;
  std::string format = "text";
  int max_retries = 2;
  double temperature = 0.0;
  std::string prompts_dir;
};

int cmd_grade(const GradeArgs& a, std::ostream& out) {
  const auto script = layout::parse_script_text(read_file(a.input));
  grading::StrategyConfig config;
  config.strategy_id = a.strategy;
  config.model_name = a.model;
  config.stop_at_first_mistake = !a.all_steps;
  config.max_retries = a.max_retries;
  config.temperature = a.temperature;

  std::shared_ptr<backends::LlmBackend> llm;
  if (grading::is_llm_strategy(a.strategy)) {
    backends::RegistrySource source(backends::RegistrySource::environment_path());
    auto reg = source.current();
    if (a.backend.empty()) throw std::runtime_error("strategy '" + a.strategy + "' needs --backend");
    const auto* d = reg->find(a.backend);
    if (!d) throw std::runtime_error("unknown backend '" + a.backend + "'");
    if (config.model_name.empty() && !d->models.empty()) config.model_name = d->models.front();
    llm = reg->make_llm(a.backend);
    if (!llm) throw std::runtime_error("backend '" + a.backend + "' cannot serve strategy '" + a.strategy + "'");
  } else if (!a.backend.empty() && a.backend != backends::kOracleBackendId) {
    throw std::runtime_error("the oracle strategy runs only on the \"oracle\" backend");
  }

  const grading::PromptLibrary prompts = a.prompts_dir.empty()
                                             ? grading::PromptLibrary::builtin()
                                             : grading::PromptLibrary::with_overrides(a.prompts_dir);
  const auto report = grading::grade(script, config, llm.get(), nullptr, prompts);
  if (a.format == "json") {
    out << grading::to_json(report).dump(2) << "\n";
  } else {
    print_report_text(report, out);
  }
  return exit_code_for(report);
}

int cmd_order(const std::string& lines_path, const std::string& format, std::ostream& out) {
  const auto doc = layout::parse_ocr_document(read_file(lines_path));
  const auto ordered = layout::sort_lines(doc.lines, doc.page);
  if (format == "json") {
    json ids = json::array();
    for (const auto& l : ordered) ids.push_back(l.id);
    out << json{{"order", ids}}.dump() << "\n";
  } else {
    for (const auto& l : ordered) out << l.id << "\t" << layout::to_string(l.cls) << "\t" << l.text << "\n";
  }
  return kExitAllCorrect;
}

int cmd_layout(const std::string& lines_path, const std::string& format, std::ostream& out, std::ostream& err) {
  const auto doc = layout::parse_ocr_document(read_file(lines_path));
  const auto script = layout::build_script(doc.lines, doc.page);
  if (script.steps.empty()) err << "warning: no handwritten or equation lines; the script has no steps\n";
  if (format == "text") {
    out << layout::format_script_text(script);
  } else {
    out << layout::to_json(script).dump(2) << "\n";
  }
  return kExitAllCorrect;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "mmc-data";
  std::string static_dir;
  int workers = 2;
  std::size_t max_jobs = 1000;
};

int cmd_serve(const ServeArgs& a, std::ostream& out, std::ostream& err) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);  // inherited by every thread started below

  auto registry = std::make_shared<backends::RegistrySource>(backends::RegistrySource::environment_path());
  service::ServiceOptions opts;
  opts.data_dir = a.data_dir;
  opts.workers = a.workers;
  opts.max_jobs = a.max_jobs;
  service::JobService svc(opts, registry);
  for (const auto& p : svc.load_problems()) err << "warning: skipped stored job " << p << "\n";

  std::optional<fs::path> static_dir;
  if (!a.static_dir.empty()) static_dir = fs::path(a.static_dir);
  service::HttpServer server(svc, static_dir);
  const int port = server.start(a.host, a.port);
  out << "listening on http://" << a.host << ":" << port << "\n" << std::flush;

  int sig = 0;
  sigwait(&set, &sig);
  out << "shutting down\n";
  server.stop();
  svc.shutdown();
  return kExitAllCorrect;
}

int cmd_config(const std::string& format, std::ostream& out) {
  backends::RegistrySource source(backends::RegistrySource::environment_path());
  const json cfg = service::config_json(*source.current(), source.last_error());
  if (format == "json") {
    out << cfg.dump(2) << "\n";
    return kExitAllCorrect;
  }
  out << "strategies:\n";
  for (const auto& s : cfg["strategies"]) out << "  " << s["id"].get<std::string>() << "\n";
  out << "backends:\n";
  for (const auto& b : cfg["backends"]) {
    out << "  " << b["id"].get<std::string>() << " (" << b["kind"].get<std::string>() << ")";
    for (const auto& m : b["models"]) out << " " << m.get<std::string>();
    out << "\n";
  }
  return kExitAllCorrect;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"mmc: check step-by-step arithmetic answers"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all");

  GradeArgs g;
  auto* grade = app.add_subcommand("grade", "Grade a plain-text answer script");
  grade->add_option("--input", g.input, "Script file: problem lines, a blank line, one step per line")->required();
  grade->add_option("--strategy", g.strategy, "oracle, pedcot or simple")
      ->check(CLI::IsMember(grading::strategy_ids()));
  grade->add_option("--backend", g.backend, "LLM backend id (see `mmc config`)");
  grade->add_option("--model", g.model, "Model name; defaults to the backend's first model");
  grade->add_flag("--all-steps", g.all_steps, "Keep grading after the first mistake");
  grade->add_option("--format", g.format)->check(CLI::IsMember({"text", "json"}));
  grade->add_option("--max-retries", g.max_retries)->check(CLI::Range(0, 10));
  grade->add_option("--temperature", g.temperature)->check(CLI::NonNegativeNumber);
  grade->add_option("--prompts", g.prompts_dir, "Directory of prompt template overrides")->check(CLI::ExistingDirectory);

  std::string lines_path;
  std::string order_format = "text";
  auto* order = app.add_subcommand("order", "Print OCR lines in reading order");
  order->add_option("--lines", lines_path, "OCR line JSON")->required();
  order->add_option("--format", order_format)->check(CLI::IsMember({"text", "json"}));

  std::string layout_format = "json";
  auto* lay = app.add_subcommand("layout", "Build the answer script from OCR lines");
  lay->add_option("--lines", lines_path, "OCR line JSON")->required();
  lay->add_option("--format", layout_format)->check(CLI::IsMember({"text", "json"}));

  ServeArgs s;
  auto* serve = app.add_subcommand("serve", "Run the HTTP grading service");
  serve->add_option("--port", s.port)->check(CLI::Range(0, 65535));
  serve->add_option("--host", s.host);
  serve->add_option("--data-dir", s.data_dir);
  serve->add_option("--static", s.static_dir, "Directory served under /");
  serve->add_option("--workers", s.workers)->check(CLI::Range(1, 64));
  serve->add_option("--max-jobs", s.max_jobs)->check(CLI::PositiveNumber);

  std::string config_format = "text";
  auto* config = app.add_subcommand("config", "List strategies and backends");
  config->add_option("--format", config_format)->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*grade) return cmd_grade(g, out);
    if (*order) return cmd_order(lines_path, order_format, out);
    if (*lay) return cmd_layout(lines_path, layout_format, out, err);
    if (*serve) return cmd_serve(s, out, err);
    if (*config) return cmd_config(config_format, out);
  } catch (const layout::InvalidGeometry& e) {
    err << "error: InvalidGeometry: " << e.what() << "\n";
  } catch (const grading::GradingError& e) {
    err << "error: " << grading::to_string(e.kind()) << ": " << e.what() << "\n";
  } catch (const backends::BackendError& e) {
    err << "error: " << backends::to_string(e.kind()) << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitError;
}

}  // namespace mmc::cli
