#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "mmc/grading.hpp"
#include "mmc/ocr_document.hpp"

namespace mmc::service {

using grading::Clock;

enum class JobState { Queued, OcrRunning, Grading, Done, Failed };
const char* to_string(JobState s) noexcept;
std::optional<JobState> job_state_from_string(std::string_view s);
bool is_terminal(JobState s) noexcept;
// Queued -> OcrRunning -> Grading -> Done | Failed; OcrRunning may be skipped,
// and any non-terminal state may fail.
bool is_valid_transition(JobState from, JobState to) noexcept;

struct JobInput {
  enum class Kind { Text, Lines, ImageRef };
  Kind kind = Kind::Text;
  layout::AnswerScript script;  // Text
  layout::OcrDocument lines;    // Lines
  std::string image_ref;        // ImageRef
};

struct JobRequest {
  JobInput input;
  grading::StrategyConfig config;
  std::string backend;      // LLM backend id ("oracle" for the oracle strategy)
  std::string ocr_backend;  // image input only
};

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Event payloads.
struct StateChanged {
  std::optional<JobState> from;  // absent for the first event
  JobState to = JobState::Queued;
};
struct StepGraded {
  grading::StepVerdict verdict;
};
struct PhaseCompleted {
  int step_index = 0;
  grading::Phase phase = grading::Phase::Oracle;
  std::int64_t latency_ms = 0;
  std::size_t request_chars = 0;
  std::string response_text;
};
struct Completed {
  JobState state = JobState::Done;
  std::optional<grading::Overall> overall;
  std::optional<int> first_mistake_index;
  std::size_t steps_graded = 0;
  std::string error;  // Failed jobs only
};

using EventPayload = std::variant<StateChanged, StepGraded, PhaseCompleted, Completed>;

struct StepEvent {
  std::string job_id;
  std::uint64_t sequence_no = 0;  // 1, 2, 3, ... per job
  EventPayload payload;
};

const char* event_type(const EventPayload& p) noexcept;  // "state_changed", "step_graded", ...

struct GradingJob {
  std::string job_id;
  JobRequest request;
  JobState state = JobState::Queued;
  std::optional<grading::GradingReport> report;  // iff Done
  std::string error;                             // Failed jobs
  Clock::time_point created_at;
  Clock::time_point updated_at;
  std::vector<StepEvent> events;
};

// Parses the POST /api/v1/jobs body. Only shape and config are checked here;
// backend ids are checked against the registry by the service.
JobRequest job_request_from_json(const nlohmann::json& body);
nlohmann::json to_json(const JobRequest& r);

nlohmann::json to_json(const StepEvent& e);
StepEvent step_event_from_json(const nlohmann::json& j);

// Snapshot served by GET /api/v1/jobs/{id}; no events.
nlohmann::json snapshot_json(const GradingJob& job);
// Stored record: the snapshot plus the event log.
nlohmann::json record_json(const GradingJob& job);
GradingJob job_from_record(const nlohmann::json& j);  // throws std::invalid_argument

}  // namespace mmc::service
