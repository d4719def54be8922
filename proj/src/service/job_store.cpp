#include "mmc/job_store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <fcntl.h>
#include <unistd.h>

namespace mmc::service {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw std::system_error(errno, std::generic_category(), "open " + tmp.string());
  std::size_t off = 0;
  while (off < content.size()) {
    const ssize_t n = ::write(fd, content.data() + off, content.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw std::system_error(err, std::generic_category(), "write " + tmp.string());
    }
    off += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    throw std::system_error(errno, std::generic_category(), "flush " + tmp.string());
  }
  fs::rename(tmp, path);
}

JobStore::JobStore(fs::path data_dir) : data_dir_(std::move(data_dir)), jobs_dir_(data_dir_ / "jobs") {
  fs::create_directories(jobs_dir_);
}

fs::path JobStore::job_path(const std::string& job_id) const { return jobs_dir_ / (job_id + ".json"); }

void JobStore::save(const GradingJob& job) {
  const std::string text = record_json(job).dump(2);
  std::lock_guard lock(mu_);
  write_file_atomic(job_path(job.job_id), text);
}

std::optional<GradingJob> JobStore::load(const std::string& job_id) const {
  std::ifstream in(job_path(job_id), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return job_from_record(nlohmann::json::parse(ss.str()));
}

void JobStore::remove(const std::string& job_id) {
  std::lock_guard lock(mu_);
  std::error_code ec;
  fs::remove(job_path(job_id), ec);
}

std::vector<GradingJob> JobStore::load_all(std::vector<std::string>* problems) const {
  std::vector<GradingJob> jobs;
  for (const auto& entry : fs::directory_iterator(jobs_dir_)) {
    const fs::path& p = entry.path();
    if (p.extension() != ".json") continue;  // stray .tmp files from a crash
    try {
      std::ifstream in(p, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      GradingJob job = job_from_record(nlohmann::json::parse(ss.str()));
      if (job.job_id != p.stem().string()) throw std::invalid_argument("job id does not match file name");
      jobs.push_back(std::move(job));
    } catch (const std::exception& e) {
      if (problems) problems->push_back(p.filename().string() + ": " + e.what());
    }
  }
  std::sort(jobs.begin(), jobs.end(), [](const GradingJob& a, const GradingJob& b) {
    if (a.created_at != b.created_at) return a.created_at < b.created_at;
    return a.job_id < b.job_id;
  });
  return jobs;
}

}  // namespace mmc::service
