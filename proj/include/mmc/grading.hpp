#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mmc/layout.hpp"
#include "mmc/llm.hpp"
#include "mmc/prompts.hpp"

// Stage 2: step-by-step grading of an AnswerScript.
namespace mmc::grading {

using layout::AnswerScript;
using Clock = std::chrono::system_clock;

enum class Verdict { Correct, PartiallyCorrect, Incorrect };
enum class Overall { AllCorrect, MistakeFound, Aborted };
enum class Phase { RegeneratePredict, ExtractCompare, EvaluateComment, SingleShot, Oracle };

const char* to_string(Verdict v) noexcept;
const char* to_string(Overall o) noexcept;
const char* to_string(Phase p) noexcept;
std::optional<Verdict> verdict_from_string(std::string_view s);
std::optional<Overall> overall_from_string(std::string_view s);
std::optional<Phase> phase_from_string(std::string_view s);

// Oracle evidence. For a failed equality, `expected` is the value of the left
// side and `actual` the value the student wrote on the right side.
struct OracleEvidence {
  std::optional<std::size_t> equality_index;  // 1-based
  std::string expected;
  std::string actual;
  std::string error;  // evaluation failure, e.g. division by zero
};

// LLM evidence: the Extract-and-Compare output for the step.
struct LlmEvidence {
  std::string discrepancy_summary;
};

using Evidence = std::variant<std::monostate, OracleEvidence, LlmEvidence>;

struct StepVerdict {
  int step_index = 0;  // 1-based
  Verdict verdict = Verdict::Correct;
  std::string comment;
  Evidence evidence;
};

struct PromptExchange {
  int step_index = 0;
  Phase phase = Phase::Oracle;
  std::string request_text;
  std::string response_text;
  std::int64_t latency_ms = 0;
};

inline constexpr const char* kStrategyOracle = "oracle";
inline constexpr const char* kStrategyPedCot = "pedcot";
inline constexpr const char* kStrategySimple = "simple";

const std::vector<std::string>& strategy_ids();  // oracle, pedcot, simple
bool is_llm_strategy(const std::string& strategy_id);

struct StrategyConfig {
  std::string strategy_id = kStrategyOracle;
  std::string model_name;  // LLM strategies only
  bool stop_at_first_mistake = true;
  int max_retries = 2;
  double temperature = 0.0;

  // Throws GradingError(InvalidConfig).
  void validate() const;
};

struct GradingReport {
  AnswerScript script;
  std::vector<StepVerdict> step_verdicts;
  std::optional<int> first_mistake_index;
  Overall overall = Overall::AllCorrect;
  std::vector<PromptExchange> transcript;
  std::string strategy_id;
  std::string model_name;
  double temperature = 0.0;
  bool stop_at_first_mistake = true;
  std::string abort_reason;  // set iff overall == Aborted
  Clock::time_point started_at;
  Clock::time_point finished_at;
};

// Returns a description of the first violated report invariant, if any.
std::optional<std::string> check_report_invariants(const GradingReport& report);

class GradingError : public std::runtime_error {
 public:
  enum class Kind { EmptyAnswer, EmptyProblem, InvalidConfig, UnsupportedStep, NoVerdictFound, ProtocolError };

  GradingError(Kind kind, std::string message, int step_index = 0);

  Kind kind() const noexcept { return kind_; }
  int step_index() const noexcept { return step_index_; }
  // Exchanges completed in the failing step before a ProtocolError.
  const std::vector<PromptExchange>& partial_exchanges() const noexcept { return partial_; }
  void set_partial_exchanges(std::vector<PromptExchange> exchanges) { partial_ = std::move(exchanges); }

 private:
  Kind kind_;
  int step_index_;
  std::vector<PromptExchange> partial_;
};

const char* to_string(GradingError::Kind kind) noexcept;

// Receives progress while grade() runs; called on the grading thread.
class GradingObserver {
 public:
  virtual ~GradingObserver() = default;
  virtual void on_exchange(const PromptExchange& /*exchange*/) {}
  virtual void on_verdict(const StepVerdict& /*verdict*/) {}
};

// Context carried from earlier steps into the oracle.
struct OracleCarry {
  std::optional<int> first_incorrect_step;
};

// Throws GradingError(UnsupportedStep) when step k is not pure arithmetic.
StepVerdict grade_step_oracle(const AnswerScript& script, int k, const OracleCarry& carry);

// Finds the last "VERDICT:" tag (case-insensitive) and maps the token after
// it; the comment is the text after "COMMENT:" or else the rest of the line
// block. Throws GradingError(NoVerdictFound).
std::pair<Verdict, std::string> parse_verdict(const std::string& text);

struct StepOutcome {
  StepVerdict verdict;
  std::vector<PromptExchange> exchanges;
};

// Regenerate-and-Predict, Extract-and-Compare, Evaluate-and-Comment for step k.
StepOutcome run_pedcot_step(const AnswerScript& script, int k, backends::LlmBackend& backend,
                            const StrategyConfig& config,
                            const PromptLibrary& prompts = PromptLibrary::builtin(),
                            GradingObserver* observer = nullptr);

// Single prompt per step, same verdict contract.
StepOutcome run_simple_step(const AnswerScript& script, int k, backends::LlmBackend& backend,
                            const StrategyConfig& config,
                            const PromptLibrary& prompts = PromptLibrary::builtin(),
                            GradingObserver* observer = nullptr);

// Grades steps in order with the configured strategy. Unsupported oracle
// steps and exhausted verdict retries end the run with overall = Aborted.
// Throws GradingError(EmptyAnswer / EmptyProblem / InvalidConfig) up front
// and BackendError when the model cannot be reached.
GradingReport grade(const AnswerScript& script, const StrategyConfig& config,
                    backends::LlmBackend* backend, GradingObserver* observer = nullptr,
                    const PromptLibrary& prompts = PromptLibrary::builtin());

}  // namespace mmc::grading
