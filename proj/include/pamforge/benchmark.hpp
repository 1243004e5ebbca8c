#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pamforge/audio_ingest.hpp"
#include "pamforge/dsp.hpp"
#include "pamforge/executor.hpp"

namespace pamforge {

struct WorkloadSpec {
  std::size_t fileCount = 1;
  Rational perFileDurationSec{60};
  std::uint32_t sampleRateHz = 32768;
  // White noise seeds are offset by the file index so files differ.
  SignalSpec signal = WhiteNoise{0.01, 42};

  SynthSpec file_spec(std::size_t fileIndex) const;
  // fileCount x (duration x rate x 2 bytes) + one 44-byte header per file.
  std::uint64_t total_bytes() const;
};

struct BenchResult {
  WorkloadSpec workload;
  std::size_t concurrency = 1;
  std::size_t repeats = 0;
  double meanSec = 0.0;
  double stdSec = 0.0;  // population (divides by n)
  std::vector<double> perRunSec;
  std::uint64_t recordCount = 0;
  std::string outputDigest;  // FNV-1a over the serialized features of the first run
  bool degenerate = false;   // empty workload
};

struct SpeedupRow {
  std::uint64_t workloadBytes = 0;
  std::size_t fileCount = 0;
  std::size_t concurrency = 1;
  double speedup = 1.0;
};

struct SpeedupTable {
  std::vector<SpeedupRow> rows;

  // Speed-up for a (workload, concurrency) pair; throws MissingBaseline when absent.
  double at(std::uint64_t workloadBytes, std::size_t concurrency) const;
};

struct BenchOptions {
  std::size_t repeats = 3;
  bool warmup = false;
  std::filesystem::path workDir;  // where synthetic files live
  std::filesystem::path runLog;   // incremental per-run CSV; empty disables
  ExecutorConfig executor;        // numExecutors is overridden per concurrency
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull);

// Generates (or reuses, when a matching workload is already there) the
// synthetic corpus. Fails with InsufficientDisk before writing if needed.
std::vector<std::filesystem::path> materialize_workload(const WorkloadSpec& spec, const std::filesystem::path& dir);

// Wall-clock time of process_corpus only; file discovery, header parsing and
// serialization stay outside the timed region.
std::vector<BenchResult> run_benchmark(const WorkloadSpec& spec, std::span<const std::size_t> concurrencies,
                                       const AnalysisParams& params, const BenchOptions& options);

SpeedupTable speedup(std::span<const BenchResult> results);

void emit_report(std::span<const BenchResult> results, const SpeedupTable& table,
                 const std::filesystem::path& outDir);

struct ResultsCsvRow {
  std::uint64_t workloadBytes = 0;
  std::size_t concurrency = 0;
  std::size_t repeats = 0;
  double meanSec = 0.0;
  double stdSec = 0.0;
  double speedup = 0.0;
};

void write_results_csv(std::span<const BenchResult> results, const SpeedupTable& table, std::ostream& out);
std::vector<ResultsCsvRow> parse_results_csv(std::istream& in);

// Mean and population standard deviation.
std::pair<double, double> mean_and_std(std::span<const double> values);

}  // namespace pamforge
