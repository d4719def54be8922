#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "mmc/job.hpp"
#include "mmc/job_store.hpp"
#include "mmc/registry.hpp"

namespace mmc::service {

struct ServiceOptions {
  std::filesystem::path data_dir = "mmc-data";
  std::size_t max_jobs = 1000;  // oldest finished jobs are evicted beyond this
  int workers = 2;
  // Replaces registry-built language models, e.g. with a scripted mock.
  std::function<std::shared_ptr<backends::LlmBackend>(const backends::BackendDescriptor&)> llm_factory;
};

// GET /api/v1/config body: {"strategies": [...], "backends": [...], "config_error": str|null}
nlohmann::json config_json(const backends::BackendRegistry& registry, const std::string& config_error = {});

// Accepts grading requests, runs OCR/layout and grading on a worker pool,
// persists every job and fans events out to subscribers.
class JobService {
 public:
  JobService(ServiceOptions options, std::shared_ptr<backends::RegistrySource> registry);
  ~JobService();
  JobService(const JobService&) = delete;
  JobService& operator=(const JobService&) = delete;

  // Throws ValidationError.
  std::string create_job(const nlohmann::json& body);
  std::string submit(JobRequest request);

  std::optional<GradingJob> job(const std::string& job_id) const;
  std::optional<nlohmann::json> snapshot(const std::string& job_id) const;
  std::vector<std::string> job_ids() const;  // oldest first

  // Events with sequence_no > after. Blocks up to `wait` when there are none
  // yet and the job is still running. nullopt for an unknown job.
  std::optional<std::vector<StepEvent>> events_after(const std::string& job_id, std::uint64_t after,
                                                     std::chrono::milliseconds wait) const;

  // True once the job reached Done or Failed within `timeout`.
  bool wait_until_finished(const std::string& job_id, std::chrono::milliseconds timeout) const;

  nlohmann::json config_json() const;

  // Stateless OCR proxy.
  layout::OcrDocument recognize(const std::string& bytes, const std::string& content_type,
                                const std::string& ocr_backend, const std::string& name_hint) const;

  // Stored jobs that could not be read at startup.
  const std::vector<std::string>& load_problems() const { return load_problems_; }

  bool stopping() const;
  // Stops the workers; queued jobs stay Queued on disk.
  void shutdown();

 private:
  struct Entry;

  void worker_loop();
  void run(const std::shared_ptr<Entry>& entry);
  void emit(Entry& e, EventPayload payload);
  void transition(Entry& e, JobState to, std::string error = {});
  void recover();
  void evict_locked();
  std::shared_ptr<Entry> find(const std::string& job_id) const;
  std::string new_job_id();
  std::string resolve_default_ocr(const backends::BackendRegistry& reg) const;

  ServiceOptions options_;
  std::shared_ptr<backends::RegistrySource> registry_;
  JobStore store_;
  std::vector<std::string> load_problems_;

  mutable std::mutex mu_;  // jobs_, order_, queue_, stop_
  std::condition_variable queue_cv_;
  std::map<std::string, std::shared_ptr<Entry>> jobs_;
  std::deque<std::string> order_;
  std::deque<std::shared_ptr<Entry>> queue_;
  bool stop_ = false;
  std::vector<std::thread> workers_;
  std::uint64_t id_counter_ = 0;
};

}  // namespace mmc::service
