#include "pamforge/executor.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <system_error>
#include <thread>

#include "pamforge/error.hpp"

namespace pamforge {

void ExecutorConfig::validate() const {
  if (numExecutors < 1) throw Error(ErrorCode::InvariantViolation, "num-executors must be >= 1");
  if (executorCores < 1) throw Error(ErrorCode::InvariantViolation, "executor-cores must be >= 1");
  if (blockSizeBytes == 0) throw Error(ErrorCode::InvariantViolation, "block size must be positive");
}

std::vector<TaskDescriptor> split_into_blocks(std::span<const PlannedFile> files, const ExecutorConfig& cfg) {
  cfg.validate();
  std::vector<TaskDescriptor> tasks;
  std::size_t blockId = 0;
  for (std::size_t f = 0; f < files.size(); ++f) {
    const auto& file = files[f];
    if (file.plan.recordCount == 0) continue;
    const std::uint64_t recBytes = file.record_bytes();
    if (recBytes > cfg.blockSizeBytes)
      throw Error(ErrorCode::BlockTooSmall, "one record of " + file.meta.path + " needs " +
                                                std::to_string(recBytes) + " bytes; block size is " +
                                                std::to_string(cfg.blockSizeBytes));
    const std::uint64_t perBlock = cfg.blockSizeBytes / recBytes;
    for (std::uint64_t begin = 0; begin < file.plan.recordCount; begin += perBlock) {
      TaskDescriptor t;
      t.fileId = f;
      t.recordBegin = begin;
      t.recordEnd = std::min(file.plan.recordCount, begin + perBlock);
      t.blockId = blockId++;
      t.bytes = t.record_count() * recBytes;
      tasks.push_back(t);
    }
  }
  return tasks;
}

std::size_t effective_parallelism(const ExecutorConfig& cfg, std::size_t hostCores,
                                  std::optional<std::size_t> taskCount) {
  const std::size_t available = hostCores > cfg.reservedCores ? hostCores - cfg.reservedCores : 0;
  std::size_t p = std::min(cfg.slots(), available);
  if (taskCount) p = std::min(p, *taskCount);
  return std::max<std::size_t>(p, 1);
}

namespace {

struct Completion {
  std::size_t index = 0;
  bool ok = false;
  bool fatal = false;
  std::string error;
};

class Pool {
 public:
  Pool(std::span<const TaskDescriptor> tasks, const ExecutorConfig& cfg,
       const std::function<void(const TaskDescriptor&, std::size_t)>& body)
      : cfg_(cfg), body_(body), current_(tasks.begin(), tasks.end()), execBytes_(cfg.numExecutors, 0) {
    for (std::size_t i = 0; i < current_.size(); ++i) queue_.push_back(i);
  }

  RunReport run() {
    RunReport report;
    const std::size_t n = current_.size();
    report.stats.slots = cfg_.slots();
    report.statuses.resize(n);
    if (n == 0) return report;

    const std::size_t threads = std::min(cfg_.slots(), n);
    try {
      for (std::size_t i = 0; i < threads; ++i) workers_.emplace_back([this, i] { work(i / cfg_.executorCores); });
    } catch (const std::system_error& e) {
      shutdown();
      throw Error(ErrorCode::PoolInitFailure, e.what());
    }
    report.stats.threads = threads;

    std::size_t resolved = 0;
    std::unique_lock lock(mu_);
    while (resolved < n) {
      doneCv_.wait(lock, [&] { return !completions_.empty(); });
      while (!completions_.empty()) {
        Completion c = std::move(completions_.front());
        completions_.pop_front();
        ++report.stats.attempts;
        TaskDescriptor& t = current_[c.index];
        if (c.ok) {
          report.statuses[c.index] = {t, true};
          ++resolved;
        } else if (c.fatal) {
          report.statuses[c.index] = {t, false};
          report.failures.push_back({t, c.error, false});
          ++resolved;
          stop_ = true;
          for (std::size_t idx : queue_) {
            report.statuses[idx] = {current_[idx], false};
            report.failures.push_back({current_[idx], "cancelled after fatal error", true});
            ++resolved;
          }
          queue_.clear();
        } else if (t.attempt <= cfg_.maxRetries && !stop_) {
          ++t.attempt;
          queue_.push_back(c.index);
          workCv_.notify_one();
        } else {
          report.statuses[c.index] = {t, false};
          report.failures.push_back({t, c.error, false});
          ++resolved;
        }
      }
    }
    report.stats.highWaterMark = highWater_;
    lock.unlock();
    shutdown();
    std::sort(report.failures.begin(), report.failures.end(),
              [](const TaskFailure& a, const TaskFailure& b) { return a.task.blockId < b.task.blockId; });
    return report;
  }

 private:
  bool admissible(std::size_t executor, const TaskDescriptor& t) const {
    return cfg_.executorMemoryBytes == 0 || execBytes_[executor] == 0 ||
           execBytes_[executor] + t.bytes <= cfg_.executorMemoryBytes;
  }

  void work(std::size_t executor) {
    std::unique_lock lock(mu_);
    for (;;) {
      workCv_.wait(lock, [&] { return stop_ || (!queue_.empty() && admissible(executor, current_[queue_.front()])); });
      if (stop_) return;
      const std::size_t index = queue_.front();
      queue_.pop_front();
      const TaskDescriptor task = current_[index];
      execBytes_[executor] += task.bytes;
      highWater_ = std::max(highWater_, ++inFlight_);
      lock.unlock();

      Completion c{index, false, false, {}};
      try {
        body_(task, index);
        c.ok = true;
      } catch (const FatalTaskError& e) {
        c.fatal = true;
        c.error = e.what();
      } catch (const std::exception& e) {
        c.error = e.what();
      } catch (...) {
        c.error = "unknown exception";
      }

      lock.lock();
      // Stop handing out work at once; the collector cancels what is queued.
      if (c.fatal) stop_ = true;
      --inFlight_;
      execBytes_[executor] -= task.bytes;
      completions_.push_back(std::move(c));
      doneCv_.notify_one();
      workCv_.notify_all();
    }
  }

  void shutdown() {
    {
      std::lock_guard guard(mu_);
      stop_ = true;
    }
    workCv_.notify_all();
    for (auto& w : workers_) w.join();
    workers_.clear();
  }

  const ExecutorConfig& cfg_;
  const std::function<void(const TaskDescriptor&, std::size_t)>& body_;
  std::vector<TaskDescriptor> current_;
  std::vector<std::uint64_t> execBytes_;
  std::deque<std::size_t> queue_;
  std::deque<Completion> completions_;
  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable workCv_;
  std::condition_variable doneCv_;
  std::size_t inFlight_ = 0;
  std::size_t highWater_ = 0;
  bool stop_ = false;
};

}  // namespace

RunReport run_tasks(std::span<const TaskDescriptor> tasks, const ExecutorConfig& cfg,
                    const std::function<void(const TaskDescriptor&, std::size_t)>& body) {
  cfg.validate();
  Pool pool(tasks, cfg, body);
  return pool.run();
}

}  // namespace pamforge
