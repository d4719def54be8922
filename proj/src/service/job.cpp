#include "mmc/job.hpp"

#include <algorithm>

#include "mmc/report_json.hpp"
#include "mmc/script_format.hpp"

namespace mmc::service {

using nlohmann::json;

const char* to_string(JobState s) noexcept {
  switch (s) {
    case JobState::Queued: return "Queued";
    case JobState::OcrRunning: return "OcrRunning";
    case JobState::Grading: return "Grading";
    case JobState::Done: return "Done";
    case JobState::Failed: return "Failed";
  }
  return "Failed";
}

std::optional<JobState> job_state_from_string(std::string_view s) {
  for (auto st : {JobState::Queued, JobState::OcrRunning, JobState::Grading, JobState::Done, JobState::Failed}) {
    if (s == to_string(st)) return st;
  }
  return std::nullopt;
}

bool is_terminal(JobState s) noexcept { return s == JobState::Done || s == JobState::Failed; }

bool is_valid_transition(JobState from, JobState to) noexcept {
  if (is_terminal(from)) return false;
  if (to == JobState::Failed) return true;
  switch (from) {
    case JobState::Queued: return to == JobState::OcrRunning || to == JobState::Grading;
    case JobState::OcrRunning: return to == JobState::Grading;
    case JobState::Grading: return to == JobState::Done;
    default: return false;
  }
}

const char* event_type(const EventPayload& p) noexcept {
  switch (p.index()) {
    case 0: return "state_changed";
    case 1: return "step_graded";
    case 2: return "phase_completed";
    default: return "completed";
  }
}

namespace {

template <typename T>
T opt_field(const json& body, const char* key, T fallback) {
  if (!body.contains(key) || body[key].is_null()) return fallback;
  try {
    return body[key].get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type");
  }
}

layout::AnswerScript script_from_text_input(const json& t) {
  if (t.is_string()) return layout::parse_script_text(t.get<std::string>());
  if (!t.is_object()) throw ValidationError("input.text must be a string or {\"problem\", \"steps\"}");
  if (t.contains("raw")) {
    if (!t["raw"].is_string()) throw ValidationError("input.text.raw must be a string");
    return layout::parse_script_text(t["raw"].get<std::string>());
  }
  layout::AnswerScript s;
  s.problem = opt_field<std::string>(t, "problem", "");
  if (!t.contains("steps") || !t["steps"].is_array()) throw ValidationError("input.text.steps must be an array");
  for (const auto& step : t["steps"]) {
    if (!step.is_string()) throw ValidationError("input.text.steps must hold strings");
    s.steps.push_back(step.get<std::string>());
  }
  return s;
}

bool valid_image_ref(const std::string& ref) {
  if (ref.empty() || ref == "." || ref == "..") return false;
  return ref.find('/') == std::string::npos && ref.find('\\') == std::string::npos && ref.find('\0') == std::string::npos;
}

json input_to_json(const JobInput& in) {
  switch (in.kind) {
    case JobInput::Kind::Text: return {{"text", {{"problem", in.script.problem}, {"steps", in.script.steps}}}};
    case JobInput::Kind::Lines: return {{"lines", layout::to_json(in.lines)}};
    case JobInput::Kind::ImageRef: return {{"image_ref", in.image_ref}};
  }
  return json::object();
}

json optional_int(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

JobRequest job_request_from_json(const json& body) {
  if (!body.is_object()) throw ValidationError("request body must be a JSON object");
  if (!body.contains("input") || !body["input"].is_object()) throw ValidationError("missing input object");
  const json& input = body["input"];
  int forms = 0;
  for (const char* k : {"text", "lines", "image_ref"}) forms += input.contains(k) && !input[k].is_null();
  if (forms != 1) throw ValidationError("input must contain exactly one of text, lines, image_ref");

  JobRequest r;
  if (input.contains("text") && !input["text"].is_null()) {
    r.input.kind = JobInput::Kind::Text;
    r.input.script = script_from_text_input(input["text"]);
  } else if (input.contains("lines") && !input["lines"].is_null()) {
    r.input.kind = JobInput::Kind::Lines;
    try {
      r.input.lines = layout::ocr_document_from_json(input["lines"]);
    } catch (const layout::OcrFormatError& e) {
      throw ValidationError(std::string("input.lines: ") + e.what());
    }
  } else {
    r.input.kind = JobInput::Kind::ImageRef;
    if (!input["image_ref"].is_string()) throw ValidationError("input.image_ref must be a string");
    r.input.image_ref = input["image_ref"].get<std::string>();
    if (!valid_image_ref(r.input.image_ref)) throw ValidationError("input.image_ref must be a plain file name");
  }

  if (!body.contains("strategy") || !body["strategy"].is_string()) throw ValidationError("missing strategy");
  r.config.strategy_id = body["strategy"].get<std::string>();
  const auto& ids = grading::strategy_ids();
  if (std::find(ids.begin(), ids.end(), r.config.strategy_id) == ids.end()) {
    throw ValidationError("unknown strategy '" + r.config.strategy_id + "'");
  }
  r.backend = opt_field<std::string>(body, "backend", "");
  r.config.model_name = opt_field<std::string>(body, "model", "");
  r.config.stop_at_first_mistake = opt_field<bool>(body, "stop_at_first_mistake", true);
  r.config.max_retries = opt_field<int>(body, "max_retries", 2);
  r.config.temperature = opt_field<double>(body, "temperature", 0.0);
  r.ocr_backend = opt_field<std::string>(body, "ocr_backend", "");
  return r;
}

json to_json(const JobRequest& r) {
  json j{{"input", input_to_json(r.input)},
         {"strategy", r.config.strategy_id},
         {"backend", r.backend},
         {"model", r.config.model_name.empty() ? json(nullptr) : json(r.config.model_name)},
         {"stop_at_first_mistake", r.config.stop_at_first_mistake},
         {"max_retries", r.config.max_retries},
         {"temperature", r.config.temperature}};
  if (!r.ocr_backend.empty()) j["ocr_backend"] = r.ocr_backend;
  return j;
}

json to_json(const StepEvent& e) {
  json payload;
  if (const auto* s = std::get_if<StateChanged>(&e.payload)) {
    payload = {{"from", s->from ? json(to_string(*s->from)) : json(nullptr)}, {"to", to_string(s->to)}};
  } else if (const auto* g = std::get_if<StepGraded>(&e.payload)) {
    payload = grading::to_json(g->verdict);
  } else if (const auto* p = std::get_if<PhaseCompleted>(&e.payload)) {
    payload = {{"step_index", p->step_index},
               {"phase", grading::to_string(p->phase)},
               {"latency_ms", p->latency_ms},
               {"request_chars", p->request_chars},
               {"response_text", p->response_text}};
  } else {
    const auto& c = std::get<Completed>(e.payload);
    payload = {{"state", to_string(c.state)},
               {"overall", c.overall ? json(grading::to_string(*c.overall)) : json(nullptr)},
               {"first_mistake_index", optional_int(c.first_mistake_index)},
               {"steps_graded", c.steps_graded},
               {"error", c.error.empty() ? json(nullptr) : json(c.error)}};
  }
  return {{"job_id", e.job_id}, {"sequence_no", e.sequence_no}, {"type", event_type(e.payload)}, {"payload", payload}};
}

StepEvent step_event_from_json(const json& j) {
  try {
    StepEvent e;
    e.job_id = j.at("job_id").get<std::string>();
    e.sequence_no = j.at("sequence_no").get<std::uint64_t>();
    const std::string type = j.at("type").get<std::string>();
    const json& p = j.at("payload");
    auto state = [](const json& v) {
      auto s = job_state_from_string(v.get<std::string>());
      if (!s) throw std::invalid_argument("unknown job state " + v.dump());
      return *s;
    };
    if (type == "state_changed") {
      StateChanged s;
      if (!p.at("from").is_null()) s.from = state(p.at("from"));
      s.to = state(p.at("to"));
      e.payload = s;
    } else if (type == "step_graded") {
      e.payload = StepGraded{grading::step_verdict_from_json(p)};
    } else if (type == "phase_completed") {
      PhaseCompleted pc;
      pc.step_index = p.at("step_index").get<int>();
      auto phase = grading::phase_from_string(p.at("phase").get<std::string>());
      if (!phase) throw std::invalid_argument("unknown phase");
      pc.phase = *phase;
      pc.latency_ms = p.at("latency_ms").get<std::int64_t>();
      pc.request_chars = p.at("request_chars").get<std::size_t>();
      pc.response_text = p.at("response_text").get<std::string>();
      e.payload = pc;
    } else if (type == "completed") {
      Completed c;
      c.state = state(p.at("state"));
      if (!p.at("overall").is_null()) {
        auto o = grading::overall_from_string(p.at("overall").get<std::string>());
        if (!o) throw std::invalid_argument("unknown overall");
        c.overall = *o;
      }
      if (!p.at("first_mistake_index").is_null()) c.first_mistake_index = p.at("first_mistake_index").get<int>();
      c.steps_graded = p.at("steps_graded").get<std::size_t>();
      if (!p.at("error").is_null()) c.error = p.at("error").get<std::string>();
      e.payload = c;
    } else {
      throw std::invalid_argument("unknown event type '" + type + "'");
    }
    return e;
  } catch (const json::exception& ex) {
    throw std::invalid_argument(std::string("malformed event: ") + ex.what());
  }
}

json snapshot_json(const GradingJob& job) {
  return {{"job_id", job.job_id},
          {"state", to_string(job.state)},
          {"request", to_json(job.request)},
          {"report", job.report ? grading::to_json(*job.report) : json(nullptr)},
          {"error", job.error.empty() ? json(nullptr) : json(job.error)},
          {"event_count", job.events.size()},
          {"created_at", grading::format_timestamp(job.created_at)},
          {"updated_at", grading::format_timestamp(job.updated_at)}};
}

json record_json(const GradingJob& job) {
  json j = snapshot_json(job);
  json events = json::array();
  for (const auto& e : job.events) events.push_back(to_json(e));
  j["events"] = std::move(events);
  return j;
}

GradingJob job_from_record(const json& j) {
  try {
    GradingJob job;
    job.job_id = j.at("job_id").get<std::string>();
    auto st = job_state_from_string(j.at("state").get<std::string>());
    if (!st) throw std::invalid_argument("unknown job state");
    job.state = *st;
    job.request = job_request_from_json(j.at("request"));
    if (!j.at("report").is_null()) job.report = grading::report_from_json(j.at("report"));
    if (!j.at("error").is_null()) job.error = j.at("error").get<std::string>();
    job.created_at = grading::parse_timestamp(j.at("created_at").get<std::string>());
    job.updated_at = grading::parse_timestamp(j.at("updated_at").get<std::string>());
    for (const auto& e : j.at("events")) job.events.push_back(step_event_from_json(e));
    return job;
  } catch (const json::exception& ex) {
    throw std::invalid_argument(std::string("malformed job record: ") + ex.what());
  }
}

}  // namespace mmc::service
