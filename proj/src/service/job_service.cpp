#include "mmc/job_service.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "mmc/layout.hpp"
#include "mmc/ocr_backend.hpp"

namespace mmc::service {

namespace fs = std::filesystem;
using nlohmann::json;

struct JobService::Entry {
  mutable std::mutex mu;
  mutable std::condition_variable cv;
  GradingJob job;
  std::shared_ptr<const backends::BackendRegistry> registry;  // as of submission
};

namespace {

class EventObserver : public grading::GradingObserver {
 public:
  explicit EventObserver(std::function<void(EventPayload)> sink) : sink_(std::move(sink)) {}

  void on_exchange(const grading::PromptExchange& ex) override {
    sink_(PhaseCompleted{ex.step_index, ex.phase, ex.latency_ms, ex.request_text.size(), ex.response_text});
  }
  void on_verdict(const grading::StepVerdict& v) override { sink_(StepGraded{v}); }

 private:
  std::function<void(EventPayload)> sink_;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string describe(const std::exception& e) {
  if (const auto* g = dynamic_cast<const grading::GradingError*>(&e)) {
    return std::string(grading::to_string(g->kind())) + ": " + g->what();
  }
  if (const auto* b = dynamic_cast<const backends::BackendError*>(&e)) {
    return std::string(backends::to_string(b->kind())) + ": " + b->what();
  }
  if (dynamic_cast<const layout::InvalidGeometry*>(&e)) return std::string("InvalidGeometry: ") + e.what();
  if (const auto* o = dynamic_cast<const layout::OcrFormatError*>(&e)) {
    return std::string(o->kind() == layout::OcrFormatError::Kind::UnknownClass ? "UnknownClass: " : "MalformedResponse: ") +
           o->what();
  }
  return e.what();
}

}  // namespace

JobService::JobService(ServiceOptions options, std::shared_ptr<backends::RegistrySource> registry)
    : options_(std::move(options)), registry_(std::move(registry)), store_(options_.data_dir) {
  if (!registry_) registry_ = std::make_shared<backends::RegistrySource>(std::nullopt);
  if (options_.max_jobs == 0) options_.max_jobs = 1;
  recover();
  const int n = std::max(1, options_.workers);
  for (int i = 0; i < n; ++i) workers_.emplace_back([this] { worker_loop(); });
}

JobService::~JobService() { shutdown(); }

void JobService::shutdown() {
  {
    std::lock_guard lock(mu_);
    if (stop_ && workers_.empty()) return;
    stop_ = true;
  }
  queue_cv_.notify_all();
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
  workers_.clear();
  // Wake subscribers so streams can notice the shutdown.
  std::lock_guard lock(mu_);
  for (auto& [id, e] : jobs_) e->cv.notify_all();
}

bool JobService::stopping() const {
  std::lock_guard lock(mu_);
  return stop_;
}

void JobService::recover() {
  auto jobs = store_.load_all(&load_problems_);
  std::lock_guard lock(mu_);
  for (auto& job : jobs) {
    auto e = std::make_shared<Entry>();
    e->job = std::move(job);
    if (!is_terminal(e->job.state)) {
      std::lock_guard jl(e->mu);
      transition(*e, JobState::Failed, "interrupted by restart");
    }
    order_.push_back(e->job.job_id);
    jobs_.emplace(e->job.job_id, std::move(e));
  }
  evict_locked();
}

std::string JobService::new_job_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::ostringstream ss;
  ss << std::hex;
  ss.width(16);
  ss.fill('0');
  ss << rng();
  ss.width(8);
  ss << (++id_counter_ & 0xffffffffu);
  return ss.str();
}

std::string JobService::resolve_default_ocr(const backends::BackendRegistry& reg) const {
  for (const auto& d : reg.list()) {
    if (d.kind == backends::BackendKind::Ocr) return d.id;
  }
  return {};
}

std::string JobService::create_job(const json& body) { return submit(job_request_from_json(body)); }

std::string JobService::submit(JobRequest r) {
  using backends::BackendKind;
  auto reg = registry_->current();
  const bool llm = grading::is_llm_strategy(r.config.strategy_id);

  if (r.backend.empty()) {
    if (llm) throw ValidationError("strategy '" + r.config.strategy_id + "' needs a backend");
    r.backend = backends::kOracleBackendId;
  }
  const auto* d = reg->find(r.backend);
  if (!d) throw ValidationError("unknown backend '" + r.backend + "'");
  if (d->kind != BackendKind::Llm) throw ValidationError("backend '" + r.backend + "' is not a language model");
  if (!llm && d->id != backends::kOracleBackendId) {
    throw ValidationError("the oracle strategy runs only on the \"oracle\" backend");
  }
  if (llm && d->id == backends::kOracleBackendId) {
    throw ValidationError("the \"oracle\" backend cannot serve strategy '" + r.config.strategy_id + "'");
  }
  if (llm) {
    if (r.config.model_name.empty()) r.config.model_name = d->models.front();
    if (std::find(d->models.begin(), d->models.end(), r.config.model_name) == d->models.end()) {
      throw ValidationError("backend '" + d->id + "' has no model '" + r.config.model_name + "'");
    }
  }
  try {
    r.config.validate();
  } catch (const grading::GradingError& e) {
    throw ValidationError(e.what());
  }

  if (r.input.kind == JobInput::Kind::ImageRef) {
    if (r.ocr_backend.empty()) r.ocr_backend = resolve_default_ocr(*reg);
    if (r.ocr_backend.empty()) throw ValidationError("image input needs an OCR backend and none is configured");
    const auto* o = reg->find(r.ocr_backend);
    if (!o || o->kind != BackendKind::Ocr) throw ValidationError("unknown OCR backend '" + r.ocr_backend + "'");
  } else if (!r.ocr_backend.empty()) {
    throw ValidationError("ocr_backend applies to image input only");
  }
  if (r.input.kind == JobInput::Kind::Text && r.input.script.steps.empty()) {
    throw ValidationError("the script has no steps");
  }

  auto e = std::make_shared<Entry>();
  e->registry = reg;
  {
    std::lock_guard lock(mu_);
    if (stop_) throw std::runtime_error("service is shutting down");
    e->job.job_id = new_job_id();
  }
  e->job.request = std::move(r);
  e->job.created_at = e->job.updated_at = Clock::now();
  {
    std::lock_guard jl(e->mu);
    emit(*e, StateChanged{std::nullopt, JobState::Queued});
  }
  const std::string id = e->job.job_id;
  {
    std::lock_guard lock(mu_);
    jobs_.emplace(id, e);
    order_.push_back(id);
    queue_.push_back(e);
    evict_locked();
  }
  queue_cv_.notify_one();
  return id;
}

void JobService::evict_locked() {
  auto it = order_.begin();
  while (jobs_.size() > options_.max_jobs && it != order_.end()) {
    auto found = jobs_.find(*it);
    bool done = found == jobs_.end();
    if (!done) {
      std::lock_guard jl(found->second->mu);
      done = is_terminal(found->second->job.state);
    }
    if (!done) {
      ++it;  // running jobs are never evicted
      continue;
    }
    if (found != jobs_.end()) {
      store_.remove(*it);
      jobs_.erase(found);
    }
    it = order_.erase(it);
  }
}

void JobService::emit(Entry& e, EventPayload payload) {
  StepEvent ev;
  ev.job_id = e.job.job_id;
  ev.sequence_no = e.job.events.size() + 1;
  ev.payload = std::move(payload);
  e.job.events.push_back(std::move(ev));
  e.job.updated_at = Clock::now();
  store_.save(e.job);
  e.cv.notify_all();
}

void JobService::transition(Entry& e, JobState to, std::string error) {
  const JobState from = e.job.state;
  if (!is_valid_transition(from, to)) {
    throw std::logic_error(std::string("bad job transition ") + to_string(from) + " -> " + to_string(to));
  }
  e.job.state = to;
  if (to == JobState::Failed) e.job.error = std::move(error);
  emit(e, StateChanged{from, to});
  if (is_terminal(to)) {
    Completed c;
    c.state = to;
    c.error = e.job.error;
    if (e.job.report) {
      c.overall = e.job.report->overall;
      c.first_mistake_index = e.job.report->first_mistake_index;
      c.steps_graded = e.job.report->step_verdicts.size();
    }
    emit(e, c);
  }
}

void JobService::worker_loop() {
  for (;;) {
    std::shared_ptr<Entry> e;
    {
      std::unique_lock lock(mu_);
      queue_cv_.wait(lock, [&] { return stop_ || !queue_.empty(); });
      if (stop_) return;
      e = std::move(queue_.front());
      queue_.pop_front();
    }
    run(e);
  }
}

void JobService::run(const std::shared_ptr<Entry>& entry) {
  Entry& e = *entry;
  JobRequest req;
  {
    std::lock_guard jl(e.mu);
    req = e.job.request;
  }
  auto locked = [&](auto&& fn) {
    std::lock_guard jl(e.mu);
    fn();
  };
  try {
    layout::AnswerScript script;
    if (req.input.kind == JobInput::Kind::Text) {
      script = req.input.script;
    } else {
      locked([&] { transition(e, JobState::OcrRunning); });
      layout::OcrDocument doc;
      if (req.input.kind == JobInput::Kind::Lines) {
        doc = req.input.lines;
      } else {
        const fs::path image = store_.data_dir() / "images" / req.input.image_ref;
        const std::string bytes = fs::exists(image) ? read_file(image) : std::string{};
        auto ocr = e.registry->make_ocr(req.ocr_backend);
        doc = ocr->recognize(bytes, backends::content_type_for(req.input.image_ref), req.input.image_ref);
      }
      script = layout::build_script(doc.lines, doc.page);
    }

    locked([&] { transition(e, JobState::Grading); });
    std::shared_ptr<backends::LlmBackend> llm;
    if (grading::is_llm_strategy(req.config.strategy_id)) {
      const auto* d = e.registry->find(req.backend);
      if (!d) throw backends::ConfigError("backend '" + req.backend + "' disappeared");
      llm = options_.llm_factory ? options_.llm_factory(*d) : e.registry->make_llm(req.backend);
    }
    EventObserver observer([&](EventPayload p) { locked([&] { emit(e, std::move(p)); }); });
    grading::GradingReport report = grading::grade(script, req.config, llm.get(), &observer);
    locked([&] {
      e.job.report = std::move(report);
      transition(e, JobState::Done);
    });
  } catch (const std::exception& ex) {
    const std::string msg = describe(ex);
    try {
      locked([&] {
        e.job.report.reset();
        transition(e, JobState::Failed, msg);
      });
    } catch (const std::exception&) {
      // Already terminal or the store is unwritable; nothing more to record.
    }
  }
}

std::shared_ptr<JobService::Entry> JobService::find(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  return it == jobs_.end() ? nullptr : it->second;
}

std::optional<GradingJob> JobService::job(const std::string& job_id) const {
  auto e = find(job_id);
  if (!e) return std::nullopt;
  std::lock_guard jl(e->mu);
  return e->job;
}

std::optional<json> JobService::snapshot(const std::string& job_id) const {
  auto e = find(job_id);
  if (!e) return std::nullopt;
  std::lock_guard jl(e->mu);
  return snapshot_json(e->job);
}

std::vector<std::string> JobService::job_ids() const {
  std::lock_guard lock(mu_);
  return {order_.begin(), order_.end()};
}

std::optional<std::vector<StepEvent>> JobService::events_after(const std::string& job_id, std::uint64_t after,
                                                               std::chrono::milliseconds wait) const {
  auto e = find(job_id);
  if (!e) return std::nullopt;
  std::unique_lock jl(e->mu);
  auto ready = [&] { return e->job.events.size() > after || is_terminal(e->job.state); };
  if (!ready() && wait.count() > 0) e->cv.wait_for(jl, wait, ready);
  std::vector<StepEvent> out;
  for (std::size_t i = static_cast<std::size_t>(std::min<std::uint64_t>(after, e->job.events.size()));
       i < e->job.events.size(); ++i) {
    out.push_back(e->job.events[i]);
  }
  return out;
}

bool JobService::wait_until_finished(const std::string& job_id, std::chrono::milliseconds timeout) const {
  auto e = find(job_id);
  if (!e) return false;
  std::unique_lock jl(e->mu);
  return e->cv.wait_for(jl, timeout, [&] { return is_terminal(e->job.state); });
}

json config_json(const backends::BackendRegistry& reg, const std::string& config_error) {
  json strategies = json::array();
  for (const auto& id : grading::strategy_ids()) {
    const bool llm = grading::is_llm_strategy(id);
    std::string name = id == grading::kStrategyOracle  ? "Exact arithmetic check"
                       : id == grading::kStrategyPedCot ? "Pedagogical chain of thought (3 prompts per step)"
                                                        : "Single prompt per step";
    strategies.push_back({{"id", id}, {"display_name", name}, {"uses_model", llm}});
  }
  return {{"strategies", std::move(strategies)},
          {"backends", reg.to_json()},
          {"config_error", config_error.empty() ? json(nullptr) : json(config_error)}};
}

json JobService::config_json() const {
  auto reg = registry_->current();
  return service::config_json(*reg, registry_->last_error());
}

layout::OcrDocument JobService::recognize(const std::string& bytes, const std::string& content_type,
                                          const std::string& ocr_backend, const std::string& name_hint) const {
  auto reg = registry_->current();
  const std::string id = ocr_backend.empty() ? resolve_default_ocr(*reg) : ocr_backend;
  if (id.empty()) throw ValidationError("no OCR backend is configured");
  const auto* d = reg->find(id);
  if (!d || d->kind != backends::BackendKind::Ocr) throw ValidationError("unknown OCR backend '" + id + "'");
  return reg->make_ocr(id)->recognize(bytes, content_type, name_hint);
}

}  // namespace mmc::service
