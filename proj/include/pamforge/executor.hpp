#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pamforge/audio_ingest.hpp"

namespace pamforge {

// Worker-pool shape. Executors are slot groups inside one process; each runs
// up to executorCores tasks at a time. HDFS clients reportedly reach full write
// throughput at five or fewer tasks per executor; that I/O effect is not modelled.
struct ExecutorConfig {
  std::size_t numExecutors = 1;
  std::size_t executorCores = 1;
  std::uint64_t blockSizeBytes = 64ull << 20;
  std::size_t maxRetries = 2;
  std::size_t reservedCores = 1;
  // Soft per-executor admission budget over in-flight task bytes; 0 disables.
  std::uint64_t executorMemoryBytes = 0;

  std::size_t slots() const noexcept { return numExecutors * executorCores; }
  void validate() const;
};

struct PlannedFile {
  AudioFileMeta meta;
  RecordPlan plan;

  std::uint64_t record_bytes() const noexcept { return plan.recordSizeSamples * meta.block_align(); }
};

struct TaskDescriptor {
  std::size_t fileId = 0;  // index into the planned file list
  std::uint64_t recordBegin = 0;
  std::uint64_t recordEnd = 0;  // exclusive
  std::size_t blockId = 0;
  std::size_t attempt = 1;
  std::uint64_t bytes = 0;

  std::uint64_t record_count() const noexcept { return recordEnd - recordBegin; }
};

// Whole records per block, never straddling; one task per block.
std::vector<TaskDescriptor> split_into_blocks(std::span<const PlannedFile> files, const ExecutorConfig& cfg);

std::size_t effective_parallelism(const ExecutorConfig& cfg, std::size_t hostCores,
                                  std::optional<std::size_t> taskCount = std::nullopt);

// Thrown by a task function to stop the whole run: pending tasks are
// cancelled and reported in the manifest.
class FatalTaskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TaskFailure {
  TaskDescriptor task;
  std::string error;
  bool cancelled = false;
};

struct RunStats {
  std::size_t slots = 0;
  std::size_t threads = 0;
  std::size_t highWaterMark = 0;  // max tasks in flight at once
  std::size_t attempts = 0;
};

// Runs body(task, taskIndex) for every task; a throw marks the attempt failed.
// Returns, per task index, the final descriptor (with its attempt number) and
// whether it succeeded.
struct TaskStatus {
  TaskDescriptor task;
  bool ok = false;
};

struct RunReport {
  std::vector<TaskStatus> statuses;
  std::vector<TaskFailure> failures;
  RunStats stats;
};

RunReport run_tasks(std::span<const TaskDescriptor> tasks, const ExecutorConfig& cfg,
                    const std::function<void(const TaskDescriptor&, std::size_t)>& body);

template <typename R>
struct TaskResult {
  TaskDescriptor task;
  R value;
};

template <typename R>
struct RunOutcome {
  std::vector<TaskResult<R>> results;  // in task order
  std::vector<TaskFailure> failures;
  RunStats stats;
};

// Typed wrapper: each task writes only its own slot, and the pool's join
// orders those writes before the results are read here.
template <typename R>
RunOutcome<R> run(std::span<const TaskDescriptor> tasks, const ExecutorConfig& cfg,
                  const std::function<R(const TaskDescriptor&)>& taskFn) {
  std::vector<std::optional<R>> slots(tasks.size());
  RunReport report = run_tasks(tasks, cfg, [&](const TaskDescriptor& t, std::size_t i) { slots[i] = taskFn(t); });
  RunOutcome<R> out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (report.statuses[i].ok) out.results.push_back({report.statuses[i].task, std::move(*slots[i])});
  }
  out.failures = std::move(report.failures);
  out.stats = report.stats;
  return out;
}

}  // namespace pamforge
