#pragma once

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mmc/job.hpp"

namespace mmc::service {

// One JSON document per job under <data_dir>/jobs/<job_id>.json, written to a
// temp file and renamed into place.
class JobStore {
 public:
  explicit JobStore(std::filesystem::path data_dir);

  const std::filesystem::path& data_dir() const { return data_dir_; }
  std::filesystem::path job_path(const std::string& job_id) const;

  void save(const GradingJob& job);
  std::optional<GradingJob> load(const std::string& job_id) const;
  void remove(const std::string& job_id);

  // Every readable record, oldest first. Unreadable files are skipped and
  // reported through `problems`.
  std::vector<GradingJob> load_all(std::vector<std::string>* problems = nullptr) const;

 private:
  std::filesystem::path data_dir_;
  std::filesystem::path jobs_dir_;
  mutable std::mutex mu_;
};

// Writes `content` to `path` via a sibling temp file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace mmc::service
