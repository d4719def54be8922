#include "mmc/report_json.hpp"

#include <cstdio>
#include <ctime>
#include <stdexcept>

namespace mmc::grading {

using nlohmann::json;

std::string format_timestamp(Clock::time_point t) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
  std::time_t secs = static_cast<std::time_t>(ms / 1000);
  long frac = static_cast<long>(ms % 1000);
  if (frac < 0) {
    frac += 1000;
    --secs;
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03ldZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, frac);
  return buf;
}

Clock::time_point parse_timestamp(std::string_view text) {
  int year, month, day, hour, minute, second;
  int consumed = 0;
  const std::string s(text);
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &year, &month, &day, &hour, &minute, &second,
                  &consumed) != 6) {
    throw std::invalid_argument("bad RFC 3339 timestamp: " + s);
  }
  std::size_t i = static_cast<std::size_t>(consumed);
  long millis = 0;
  if (i < s.size() && s[i] == '.') {
    ++i;
    int digits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
      if (digits < 3) millis = millis * 10 + (s[i] - '0');
      ++digits;
      ++i;
    }
    for (; digits < 3; ++digits) millis *= 10;
  }
  long offset_minutes = 0;
  if (i < s.size() && (s[i] == 'Z' || s[i] == 'z')) {
    ++i;
  } else if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    int oh = 0, om = 0;
    if (std::sscanf(s.c_str() + i + 1, "%2d:%2d", &oh, &om) != 2) {
      throw std::invalid_argument("bad RFC 3339 offset: " + s);
    }
    offset_minutes = (s[i] == '-' ? -1 : 1) * (oh * 60 + om);
    i += 6;
  } else {
    throw std::invalid_argument("RFC 3339 timestamp needs a zone: " + s);
  }
  if (i != s.size()) throw std::invalid_argument("trailing text in timestamp: " + s);

  std::tm tm{};
  tm.tm_year = year - 1900;
  tm.tm_mon = month - 1;
  tm.tm_mday = day;
  tm.tm_hour = hour;
  tm.tm_min = minute;
  tm.tm_sec = second;
  const std::time_t secs = timegm(&tm) - offset_minutes * 60;
  return Clock::time_point{} + std::chrono::seconds(secs) + std::chrono::milliseconds(millis);
}

namespace {

json evidence_to_json(const Evidence& e) {
  if (const auto* o = std::get_if<OracleEvidence>(&e)) {
    json j{{"kind", "oracle"}};
    j["equality_index"] = o->equality_index ? json(*o->equality_index) : json(nullptr);
    j["expected"] = o->expected;
    j["actual"] = o->actual;
    if (!o->error.empty()) j["error"] = o->error;
    return j;
  }
  if (const auto* l = std::get_if<LlmEvidence>(&e)) {
    return json{{"kind", "llm"}, {"discrepancy_summary", l->discrepancy_summary}};
  }
  return nullptr;
}

Evidence evidence_from_json(const json& j) {
  if (j.is_null()) return std::monostate{};
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "oracle") {
    OracleEvidence o;
    if (!j.at("equality_index").is_null()) o.equality_index = j.at("equality_index").get<std::size_t>();
    o.expected = j.at("expected").get<std::string>();
    o.actual = j.at("actual").get<std::string>();
    o.error = j.value("error", std::string{});
    return o;
  }
  if (kind == "llm") return LlmEvidence{j.at("discrepancy_summary").get<std::string>()};
  throw std::invalid_argument("unknown evidence kind '" + kind + "'");
}

template <typename T>
T must(std::optional<T> v, const std::string& what) {
  if (!v) throw std::invalid_argument("unknown " + what);
  return *v;
}

}  // namespace

json to_json(const StepVerdict& v) {
  return json{{"step_index", v.step_index},
              {"verdict", to_string(v.verdict)},
              {"comment", v.comment},
              {"evidence", evidence_to_json(v.evidence)}};
}

json to_json(const PromptExchange& e) {
  return json{{"step_index", e.step_index},
              {"phase", to_string(e.phase)},
              {"request_text", e.request_text},
              {"response_text", e.response_text},
              {"latency_ms", e.latency_ms}};
}

json to_json(const GradingReport& r) {
  json verdicts = json::array();
  for (const auto& v : r.step_verdicts) verdicts.push_back(to_json(v));
  json transcript = json::array();
  for (const auto& e : r.transcript) transcript.push_back(to_json(e));
  return json{
      {"strategy_id", r.strategy_id},
      {"model", r.model_name.empty() ? json(nullptr) : json(r.model_name)},
      {"temperature", r.temperature},
      {"stop_at_first_mistake", r.stop_at_first_mistake},
      {"script", {{"problem", r.script.problem}, {"steps", r.script.steps}}},
      {"step_verdicts", std::move(verdicts)},
      {"first_mistake_index", r.first_mistake_index ? json(*r.first_mistake_index) : json(nullptr)},
      {"overall", to_string(r.overall)},
      {"abort_reason", r.abort_reason.empty() ? json(nullptr) : json(r.abort_reason)},
      {"transcript", std::move(transcript)},
      {"started_at", format_timestamp(r.started_at)},
      {"finished_at", format_timestamp(r.finished_at)},
  };
}

StepVerdict step_verdict_from_json(const json& j) {
  StepVerdict v;
  v.step_index = j.at("step_index").get<int>();
  v.verdict = must(verdict_from_string(j.at("verdict").get<std::string>()), "verdict");
  v.comment = j.at("comment").get<std::string>();
  v.evidence = evidence_from_json(j.value("evidence", json(nullptr)));
  return v;
}

PromptExchange exchange_from_json(const json& j) {
  PromptExchange e;
  e.step_index = j.at("step_index").get<int>();
  e.phase = must(phase_from_string(j.at("phase").get<std::string>()), "phase");
  e.request_text = j.at("request_text").get<std::string>();
  e.response_text = j.at("response_text").get<std::string>();
  e.latency_ms = j.at("latency_ms").get<std::int64_t>();
  return e;
}

GradingReport report_from_json(const json& j) {
  try {
    GradingReport r;
    r.strategy_id = j.at("strategy_id").get<std::string>();
    r.model_name = j.at("model").is_null() ? std::string{} : j.at("model").get<std::string>();
    r.temperature = j.at("temperature").get<double>();
    r.stop_at_first_mistake = j.at("stop_at_first_mistake").get<bool>();
    r.script.problem = j.at("script").at("problem").get<std::string>();
    r.script.steps = j.at("script").at("steps").get<std::vector<std::string>>();
    for (const auto& v : j.at("step_verdicts")) r.step_verdicts.push_back(step_verdict_from_json(v));
    if (!j.at("first_mistake_index").is_null()) r.first_mistake_index = j.at("first_mistake_index").get<int>();
    r.overall = must(overall_from_string(j.at("overall").get<std::string>()), "overall");
    if (!j.at("abort_reason").is_null()) r.abort_reason = j.at("abort_reason").get<std::string>();
    for (const auto& e : j.at("transcript")) r.transcript.push_back(exchange_from_json(e));
    r.started_at = parse_timestamp(j.at("started_at").get<std::string>());
    r.finished_at = parse_timestamp(j.at("finished_at").get<std::string>());
    return r;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed grading report: ") + e.what());
  }
}

json to_json(const StrategyConfig& c) {
  return json{{"strategy_id", c.strategy_id},
              {"model", c.model_name.empty() ? json(nullptr) : json(c.model_name)},
              {"stop_at_first_mistake", c.stop_at_first_mistake},
              {"max_retries", c.max_retries},
              {"temperature", c.temperature}};
}

}  // namespace mmc::grading
