#include "mmc/grading.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "mmc/mathstep.hpp"
#include "utf8.hpp"

namespace mmc::grading {

using backends::BackendError;
using backends::ChatMessage;
using backends::LlmBackend;

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Correct: return "Correct";
    case Verdict::PartiallyCorrect: return "PartiallyCorrect";
    case Verdict::Incorrect: return "Incorrect";
  }
  return "Correct";
}

const char* to_string(Overall o) noexcept {
  switch (o) {
    case Overall::AllCorrect: return "AllCorrect";
    case Overall::MistakeFound: return "MistakeFound";
    case Overall::Aborted: return "Aborted";
  }
  return "Aborted";
}

const char* to_string(Phase p) noexcept {
  switch (p) {
    case Phase::RegeneratePredict: return "RegeneratePredict";
    case Phase::ExtractCompare: return "ExtractCompare";
    case Phase::EvaluateComment: return "EvaluateComment";
    case Phase::SingleShot: return "SingleShot";
    case Phase::Oracle: return "Oracle";
  }
  return "Oracle";
}

std::optional<Verdict> verdict_from_string(std::string_view s) {
  for (Verdict v : {Verdict::Correct, Verdict::PartiallyCorrect, Verdict::Incorrect}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

std::optional<Overall> overall_from_string(std::string_view s) {
  for (Overall o : {Overall::AllCorrect, Overall::MistakeFound, Overall::Aborted}) {
    if (s == to_string(o)) return o;
  }
  return std::nullopt;
}

std::optional<Phase> phase_from_string(std::string_view s) {
  for (Phase p : {Phase::RegeneratePredict, Phase::ExtractCompare, Phase::EvaluateComment,
                  Phase::SingleShot, Phase::Oracle}) {
    if (s == to_string(p)) return p;
  }
  return std::nullopt;
}

const char* to_string(GradingError::Kind kind) noexcept {
  switch (kind) {
    case GradingError::Kind::EmptyAnswer: return "EmptyAnswer";
    case GradingError::Kind::EmptyProblem: return "EmptyProblem";
    case GradingError::Kind::InvalidConfig: return "InvalidConfig";
    case GradingError::Kind::UnsupportedStep: return "UnsupportedStep";
    case GradingError::Kind::NoVerdictFound: return "NoVerdictFound";
    case GradingError::Kind::ProtocolError: return "ProtocolError";
  }
  return "GradingError";
}

GradingError::GradingError(Kind kind, std::string message, int step_index)
    : std::runtime_error(std::move(message)), kind_(kind), step_index_(step_index) {}

const std::vector<std::string>& strategy_ids() {
  static const std::vector<std::string> ids{kStrategyOracle, kStrategyPedCot, kStrategySimple};
  return ids;
}

bool is_llm_strategy(const std::string& strategy_id) {
  return strategy_id == kStrategyPedCot || strategy_id == kStrategySimple;
}

void StrategyConfig::validate() const {
  auto fail = [](const std::string& m) { throw GradingError(GradingError::Kind::InvalidConfig, m); };
  const auto& ids = strategy_ids();
  if (std::find(ids.begin(), ids.end(), strategy_id) == ids.end()) {
    fail("unknown strategy '" + strategy_id + "'");
  }
  if (is_llm_strategy(strategy_id) && model_name.empty()) {
    fail("strategy '" + strategy_id + "' needs a model name");
  }
  if (!is_llm_strategy(strategy_id) && !model_name.empty()) {
    fail("strategy '" + strategy_id + "' does not take a model name");
  }
  if (max_retries < 0 || max_retries > 10) fail("max_retries must be within [0, 10]");
  if (!std::isfinite(temperature) || temperature < 0) fail("temperature must be >= 0");
}

// ---------------------------------------------------------------------------
// Oracle

namespace {

std::string show(const math::Rational& value) {
  if (auto dec = value.to_decimal_string()) return *dec;
  return value.to_string();
}

[[noreturn]] void unsupported(int k, const std::string& why) {
  throw GradingError(GradingError::Kind::UnsupportedStep,
                     "step " + std::to_string(k) + " is not pure arithmetic: " + why, k);
}

void check_step_index(const AnswerScript& script, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > script.steps.size()) {
    throw std::out_of_range("step index " + std::to_string(k) + " outside the script");
  }
}

}  // namespace

StepVerdict grade_step_oracle(const AnswerScript& script, int k, const OracleCarry& carry) {
  check_step_index(script, k);
  const std::string& text = script.steps[static_cast<std::size_t>(k - 1)];

  math::EqualityChain chain;
  try {
    chain = math::parse_chain(text);
  } catch (const math::MathError& e) {
    unsupported(k, e.what());
  }

  StepVerdict v;
  v.step_index = k;
  math::ChainResult result;
  try {
    result = math::check_chain(chain);
  } catch (const math::EvalError& e) {
    if (e.code() != math::MathErrc::DivisionByZero) unsupported(k, e.what());
    const std::size_t expr = e.expression_index().value_or(0) + 1;
    v.verdict = Verdict::Incorrect;
    v.comment = "Expression " + std::to_string(expr) + " divides by zero.";
    v.evidence = OracleEvidence{std::nullopt, {}, {}, "division by zero in expression " + std::to_string(expr)};
    return v;
  }

  if (const auto& f = result.first_failure) {
    v.verdict = Verdict::Incorrect;
    v.comment = "Equality " + std::to_string(f->equality_index) +
                " does not hold: the left side evaluates to " + show(f->lhs_value) +
                " but the right side evaluates to " + show(f->rhs_value) + ".";
    v.evidence = OracleEvidence{f->equality_index, f->lhs_value.to_string(), f->rhs_value.to_string(), {}};
    return v;
  }

  if (carry.first_incorrect_step) {
    v.verdict = Verdict::PartiallyCorrect;
    v.comment = "The arithmetic in this step is sound, but it continues from the mistake in step " +
                std::to_string(*carry.first_incorrect_step) + ".";
  } else {
    v.verdict = Verdict::Correct;
    v.comment = result.values.size() > 1
                    ? "Every equality holds; the step evaluates to " + show(result.values.back()) + "."
                    : "The expression evaluates to " + show(result.values.back()) + ".";
  }
  return v;
}

// ---------------------------------------------------------------------------
// Verdict parsing

namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string strip_comment(std::string_view s) {
  std::string t = utf8::trim(s);
  std::size_t i = 0;
  while (i < t.size() && std::string_view(".,;:-|*").find(t[i]) != std::string_view::npos) ++i;
  return utf8::trim(std::string_view(t).substr(i));
}

[[noreturn]] void no_verdict() {
  throw GradingError(GradingError::Kind::NoVerdictFound, "response has no parseable VERDICT line");
}

}  // namespace

std::pair<Verdict, std::string> parse_verdict(const std::string& text) {
  const std::string lower = ascii_lower(text);
  const std::size_t tag = lower.rfind("verdict:");
  if (tag == std::string::npos) no_verdict();

  std::size_t i = tag + 8;
  auto skip = [&](std::string_view chars) {
    while (i < lower.size() && chars.find(lower[i]) != std::string_view::npos) ++i;
  };
  auto word = [&] {
    const std::size_t start = i;
    while (i < lower.size() && std::isalpha(static_cast<unsigned char>(lower[i]))) ++i;
    return lower.substr(start, i - start);
  };

  skip(" \t*`\"'");
  Verdict verdict;
  const std::string first = word();
  if (first == "correct") {
    verdict = Verdict::Correct;
  } else if (first == "incorrect") {
    verdict = Verdict::Incorrect;
  } else if (first == "partially") {
    skip(" \t_-");
    if (word() != "correct") no_verdict();
    verdict = Verdict::PartiallyCorrect;
  } else {
    no_verdict();
  }

  const std::size_t comment = lower.find("comment:", i);
  std::string body = comment == std::string::npos ? text.substr(i) : text.substr(comment + 8);
  return {verdict, strip_comment(body)};
}

// ---------------------------------------------------------------------------
// LLM strategies

namespace {

std::string format_steps(const AnswerScript& script, int up_to_exclusive) {
  if (up_to_exclusive <= 1) return "(no steps yet)";
  std::string out;
  for (int i = 1; i < up_to_exclusive; ++i) {
    if (!out.empty()) out += '\n';
    out += "Step " + std::to_string(i) + ": " + script.steps[static_cast<std::size_t>(i - 1)];
  }
  return out;
}

// Issues backend calls for one step and records them.
class StepSession {
 public:
  StepSession(LlmBackend& backend, const StrategyConfig& config, GradingObserver* observer, int step)
      : backend_(backend), config_(config), observer_(observer), step_(step) {}

  std::string ask(Phase phase, const std::string& prompt) { return call(phase, prompt, false).first; }

  std::pair<std::string, std::pair<Verdict, std::string>> ask_verdict(Phase phase, const std::string& prompt) {
    auto [text, parsed] = call(phase, prompt, true);
    return {std::move(text), *parsed};
  }

  std::vector<PromptExchange>& exchanges() { return exchanges_; }

 private:
  // Re-asks verbatim on retryable transport errors and, when a verdict is
  // required, on verdict-free replies; max_retries + 1 attempts in total.
  std::pair<std::string, std::optional<std::pair<Verdict, std::string>>> call(Phase phase,
                                                                               const std::string& prompt,
                                                                               bool need_verdict) {
    const int attempts = config_.max_retries + 1;
    const std::vector<ChatMessage> messages{{backends::Role::User, prompt}};
    for (int attempt = 1;; ++attempt) {
      const auto start = std::chrono::steady_clock::now();
      std::string response;
      try {
        response = backend_.chat_complete(messages, config_.model_name, config_.temperature);
      } catch (const BackendError& e) {
        if (!e.retryable() || attempt >= attempts) throw;
        continue;
      }
      const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
      record({step_, phase, prompt, response, elapsed.count()});

      if (!need_verdict) return {std::move(response), std::nullopt};
      try {
        auto parsed = parse_verdict(response);
        return {std::move(response), std::move(parsed)};
      } catch (const GradingError&) {
        if (attempt >= attempts) {
          GradingError err(GradingError::Kind::ProtocolError,
                           "step " + std::to_string(step_) + ": no parseable verdict after " +
                               std::to_string(attempts) + " responses",
                           step_);
          err.set_partial_exchanges(exchanges_);
          throw err;
        }
      }
    }
  }

  void record(PromptExchange exchange) {
    exchanges_.push_back(std::move(exchange));
    if (observer_) observer_->on_exchange(exchanges_.back());
  }

  LlmBackend& backend_;
  const StrategyConfig& config_;
  GradingObserver* observer_;
  int step_;
  std::vector<PromptExchange> exchanges_;
};

StepVerdict make_llm_verdict(int k, std::pair<Verdict, std::string> parsed, Evidence evidence) {
  StepVerdict v{k, parsed.first, std::move(parsed.second), std::move(evidence)};
  if (v.verdict == Verdict::Incorrect && v.comment.empty()) {
    v.comment = "Step " + std::to_string(k) + " was judged incorrect.";
  }
  return v;
}

}  // namespace

StepOutcome run_pedcot_step(const AnswerScript& script, int k, LlmBackend& backend,
                            const StrategyConfig& config, const PromptLibrary& prompts,
                            GradingObserver* observer) {
  check_step_index(script, k);
  StepSession session(backend, config, observer, k);

  // Phase 1 sees only the problem and the earlier steps.
  Bindings bindings{{"problem", script.problem}, {"prior_steps", format_steps(script, k)}};
  const std::string prediction =
      session.ask(Phase::RegeneratePredict, prompts.render("pedcot.phase1", bindings));

  bindings["phase1_response"] = prediction;
  bindings["current_step"] = script.steps[static_cast<std::size_t>(k - 1)];
  const std::string comparison = session.ask(Phase::ExtractCompare, prompts.render("pedcot.phase2", bindings));

  bindings["phase2_response"] = comparison;
  auto [_, parsed] = session.ask_verdict(Phase::EvaluateComment, prompts.render("pedcot.phase3", bindings));

  StepOutcome out;
  out.verdict = make_llm_verdict(k, std::move(parsed), LlmEvidence{comparison});
  out.exchanges = std::move(session.exchanges());
  return out;
}

StepOutcome run_simple_step(const AnswerScript& script, int k, LlmBackend& backend,
                            const StrategyConfig& config, const PromptLibrary& prompts,
                            GradingObserver* observer) {
  check_step_index(script, k);
  StepSession session(backend, config, observer, k);
  const Bindings bindings{{"problem", script.problem},
                          {"prior_steps", format_steps(script, k)},
                          {"current_step", script.steps[static_cast<std::size_t>(k - 1)]}};
  auto [_, parsed] = session.ask_verdict(Phase::SingleShot, prompts.render("simple.phase1", bindings));

  StepOutcome out;
  out.verdict = make_llm_verdict(k, std::move(parsed), std::monostate{});
  out.exchanges = std::move(session.exchanges());
  return out;
}

// ---------------------------------------------------------------------------
// Driver

GradingReport grade(const AnswerScript& script, const StrategyConfig& config, LlmBackend* backend,
                    GradingObserver* observer, const PromptLibrary& prompts) {
  config.validate();
  if (script.steps.empty()) throw GradingError(GradingError::Kind::EmptyAnswer, "the answer has no steps");
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    if (utf8::trim(script.steps[i]).empty()) {
      throw GradingError(GradingError::Kind::EmptyAnswer, "step " + std::to_string(i + 1) + " is blank",
                         static_cast<int>(i + 1));
    }
  }
  const bool llm = is_llm_strategy(config.strategy_id);
  if (llm && utf8::trim(script.problem).empty()) {
    throw GradingError(GradingError::Kind::EmptyProblem, "LLM grading needs a problem statement");
  }
  if (llm && backend == nullptr) {
    throw GradingError(GradingError::Kind::InvalidConfig, "strategy '" + config.strategy_id + "' needs a backend");
  }

  GradingReport report;
  report.script = script;
  report.strategy_id = config.strategy_id;
  report.model_name = config.model_name;
  report.temperature = config.temperature;
  report.stop_at_first_mistake = config.stop_at_first_mistake;
  report.started_at = Clock::now();

  OracleCarry carry;
  bool aborted = false;
  const int n = static_cast<int>(script.steps.size());
  for (int k = 1; k <= n; ++k) {
    StepVerdict verdict;
    try {
      if (config.strategy_id == kStrategyOracle) {
        verdict = grade_step_oracle(script, k, carry);
        PromptExchange ex{k, Phase::Oracle, script.steps[static_cast<std::size_t>(k - 1)],
                          std::string(to_string(verdict.verdict)) + ": " + verdict.comment, 0};
        report.transcript.push_back(ex);
        if (observer) observer->on_exchange(ex);
      } else {
        StepOutcome out = config.strategy_id == kStrategyPedCot
                              ? run_pedcot_step(script, k, *backend, config, prompts, observer)
                              : run_simple_step(script, k, *backend, config, prompts, observer);
        verdict = std::move(out.verdict);
        for (auto& ex : out.exchanges) report.transcript.push_back(std::move(ex));
      }
    } catch (const GradingError& e) {
      if (e.kind() != GradingError::Kind::UnsupportedStep && e.kind() != GradingError::Kind::ProtocolError) {
        throw;
      }
      for (const auto& ex : e.partial_exchanges()) report.transcript.push_back(ex);
      report.abort_reason = std::string(to_string(e.kind())) + ": " + e.what();
      aborted = true;
      break;
    }

    report.step_verdicts.push_back(verdict);
    if (observer) observer->on_verdict(report.step_verdicts.back());
    if (verdict.verdict == Verdict::Incorrect) {
      if (!report.first_mistake_index) report.first_mistake_index = k;
      if (!carry.first_incorrect_step) carry.first_incorrect_step = k;
      if (config.stop_at_first_mistake) break;
    }
  }

  const bool all_correct =
      std::all_of(report.step_verdicts.begin(), report.step_verdicts.end(),
                  [](const StepVerdict& v) { return v.verdict == Verdict::Correct; });
  if (aborted) {
    report.overall = Overall::Aborted;
  } else if (all_correct && report.step_verdicts.size() == script.steps.size()) {
    report.overall = Overall::AllCorrect;
  } else {
    report.overall = Overall::MistakeFound;
  }
  report.finished_at = Clock::now();
  return report;
}

std::optional<std::string> check_report_invariants(const GradingReport& r) {
  const std::size_t n_steps = r.script.steps.size();
  const std::size_t n = r.step_verdicts.size();
  if (n > n_steps) return "more verdicts than steps";

  std::optional<int> first_incorrect;
  bool all_correct = true;
  for (std::size_t i = 0; i < n; ++i) {
    const StepVerdict& v = r.step_verdicts[i];
    if (v.step_index != static_cast<int>(i + 1)) return "verdict step indices are not 1..n in order";
    if (v.verdict == Verdict::Incorrect) {
      if (v.comment.empty()) return "Incorrect verdict without a comment";
      if (!first_incorrect) first_incorrect = v.step_index;
    }
    if (v.verdict != Verdict::Correct) all_correct = false;
  }
  if (r.first_mistake_index != first_incorrect) return "first_mistake_index does not match the first Incorrect step";

  const bool aborted = r.overall == Overall::Aborted;
  if (aborted == r.abort_reason.empty()) return "abort_reason must be present iff overall is Aborted";
  const bool stopped = r.stop_at_first_mistake && first_incorrect && *first_incorrect == static_cast<int>(n);
  if (n < n_steps && !aborted && !stopped) return "steps missing without stop-at-first-mistake or abort";
  if (r.stop_at_first_mistake && first_incorrect && n > static_cast<std::size_t>(*first_incorrect)) {
    return "verdicts continue past the first mistake";
  }
  if (!aborted) {
    const bool expect_all = all_correct && n == n_steps;
    if ((r.overall == Overall::AllCorrect) != expect_all) return "overall disagrees with the verdicts";
  } else if (r.overall == Overall::AllCorrect) {
    return "aborted report marked AllCorrect";
  }

  int last = 0;
  for (const auto& ex : r.transcript) {
    if (ex.step_index < last) return "transcript is not in step order";
    last = ex.step_index;
  }
  if (r.finished_at < r.started_at) return "finished_at precedes started_at";
  return std::nullopt;
}

}  // namespace mmc::grading
