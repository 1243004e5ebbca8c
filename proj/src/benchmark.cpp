#include "pamforge/benchmark.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "pamforge/error.hpp"
#include "pamforge/feature_pipeline.hpp"

namespace fs = std::filesystem;

namespace pamforge {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string describe_signal(const SignalSpec& s) {
  if (const auto* sine = std::get_if<Sine>(&s)) return "sine:" + format_double(sine->freqHz) + ":" + format_double(sine->amplitude);
  if (const auto* n = std::get_if<WhiteNoise>(&s)) return "noise:" + format_double(n->variance) + ":" + std::to_string(n->seed);
  return "silence";
}

std::string describe(const WorkloadSpec& spec) {
  return "files=" + std::to_string(spec.fileCount) + ";duration=" + spec.perFileDurationSec.to_string() +
         ";rate=" + std::to_string(spec.sampleRateHz) + ";signal=" + describe_signal(spec.signal);
}

std::string file_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "bench_%05zu.wav", i);
  return buf;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

SynthSpec WorkloadSpec::file_spec(std::size_t fileIndex) const {
  SynthSpec s;
  s.durationSec = perFileDurationSec;
  s.sampleRateHz = sampleRateHz;
  s.signal = signal;
  if (auto* n = std::get_if<WhiteNoise>(&s.signal)) n->seed += fileIndex;
  return s;
}

std::uint64_t WorkloadSpec::total_bytes() const {
  if (fileCount == 0) return 0;
  return fileCount * synthetic_file_bytes(file_spec(0));
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::pair<double, double> mean_and_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

std::vector<fs::path> materialize_workload(const WorkloadSpec& spec, const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path sidecar = dir / "workload.txt";
  const std::string description = describe(spec);
  std::vector<fs::path> paths;
  for (std::size_t i = 0; i < spec.fileCount; ++i) paths.push_back(dir / file_name(i));
  if (spec.fileCount == 0) return paths;

  const std::uint64_t perFile = synthetic_file_bytes(spec.file_spec(0));
  bool reusable = false;
  if (std::ifstream in(sidecar); in) {
    std::string existing;
    std::getline(in, existing);
    reusable = existing == description && std::all_of(paths.begin(), paths.end(), [&](const fs::path& p) {
                 std::error_code ec;
                 return fs::file_size(p, ec) == perFile && !ec;
               });
  }
  if (reusable) return paths;

  const auto space = fs::space(dir);
  if (space.available < spec.total_bytes())
    throw Error(ErrorCode::InsufficientDisk, "workload needs " + std::to_string(spec.total_bytes()) + " bytes, " +
                                                 std::to_string(space.available) + " available in " + dir.string());
  fs::remove(sidecar);
  for (std::size_t i = 0; i < spec.fileCount; ++i) generate_synthetic_wav(spec.file_spec(i), paths[i]);
  std::ofstream(sidecar) << description << '\n';
  return paths;
}

std::vector<BenchResult> run_benchmark(const WorkloadSpec& spec, std::span<const std::size_t> concurrencies,
                                       const AnalysisParams& params, const BenchOptions& options) {
  if (options.repeats == 0) throw Error(ErrorCode::InvariantViolation, "repeats must be >= 1");
  params.validate();
  const fs::path dir = options.workDir.empty() ? fs::temp_directory_path() / "pamforge-bench" : options.workDir;
  const auto paths = materialize_workload(spec, dir / ("w" + hex64(fnv1a64(describe(spec)))));

  std::vector<AudioFileMeta> metas;
  for (const auto& p : paths) metas.push_back(read_wav_meta(p));
  assign_start_times(metas, TimestampPattern{});
  std::vector<PlannedFile> planned;
  for (const auto& m : metas) planned.push_back({m, plan_records(m, params.recordSizeSec)});

  std::ofstream runLog;
  if (!options.runLog.empty()) {
    const bool fresh = !fs::exists(options.runLog);
    runLog.open(options.runLog, std::ios::app);
    if (!runLog) throw Error(ErrorCode::SinkFailure, "cannot open " + options.runLog.string());
    if (fresh) runLog << "workload_bytes,concurrency,run,seconds,digest\n" << std::flush;
  }

  std::vector<BenchResult> results;
  for (std::size_t n : concurrencies) {
    ExecutorConfig cfg = options.executor;
    cfg.numExecutors = n;
    cfg.executorCores = 1;
    if (options.warmup) (void)process_corpus(planned, params, cfg);

    BenchResult r;
    r.workload = spec;
    r.concurrency = n;
    r.degenerate = spec.fileCount == 0;
    for (std::size_t run = 0; run < options.repeats; ++run) {
      const auto start = std::chrono::steady_clock::now();
      CorpusResult out = process_corpus(planned, params, cfg);
      const auto stop = std::chrono::steady_clock::now();
      const double sec = std::chrono::duration<double>(stop - start).count();
      if (!out.complete()) throw Error(ErrorCode::IoFailure, "benchmark run had failed records");

      std::uint64_t h = 0xcbf29ce484222325ull;
      std::uint64_t count = 0;
      for (const auto& f : out.files) {
        for (const auto& rec : f.records) h = fnv1a64(serialize_record(rec) + "\n", h);
        count += f.records.size();
      }
      const std::string digest = hex64(h);
      if (run == 0) {
        r.outputDigest = digest;
        r.recordCount = count;
      } else if (digest != r.outputDigest) {
        throw Error(ErrorCode::InvariantViolation, "feature output changed between repeated runs");
      }
      r.perRunSec.push_back(sec);
      if (runLog.is_open()) {
        runLog << spec.total_bytes() << ',' << n << ',' << run << ',' << format_double(sec) << ',' << digest << '\n';
        runLog.flush();
      }
      spdlog::info("workload {} B, concurrency {}, run {}: {:.3f} s", spec.total_bytes(), n, run + 1, sec);
    }
    r.repeats = r.perRunSec.size();
    std::tie(r.meanSec, r.stdSec) = mean_and_std(r.perRunSec);
    results.push_back(std::move(r));
  }
  return results;
}

SpeedupTable speedup(std::span<const BenchResult> results) {
  std::map<std::uint64_t, const BenchResult*> baseline;
  for (const auto& r : results)
    if (r.concurrency == 1) baseline[r.workload.total_bytes()] = &r;
  SpeedupTable table;
  for (const auto& r : results) {
    const auto it = baseline.find(r.workload.total_bytes());
    if (it == baseline.end())
      throw Error(ErrorCode::MissingBaseline,
                  "no concurrency-1 result for workload of " + std::to_string(r.workload.total_bytes()) + " bytes");
    SpeedupRow row;
    row.workloadBytes = r.workload.total_bytes();
    row.fileCount = r.workload.fileCount;
    row.concurrency = r.concurrency;
    // An empty workload has nothing to speed up.
    if (r.concurrency == 1 || r.degenerate || !(r.meanSec > 0.0)) {
      row.speedup = 1.0;
    } else {
      row.speedup = it->second->meanSec / r.meanSec;
    }
    table.rows.push_back(row);
  }
  return table;
}

double SpeedupTable::at(std::uint64_t workloadBytes, std::size_t concurrency) const {
  for (const auto& r : rows)
    if (r.workloadBytes == workloadBytes && r.concurrency == concurrency) return r.speedup;
  throw Error(ErrorCode::MissingBaseline, "no speed-up row for workload " + std::to_string(workloadBytes) +
                                              " at concurrency " + std::to_string(concurrency));
}

void write_results_csv(std::span<const BenchResult> results, const SpeedupTable& table, std::ostream& out) {
  out << "workload_bytes,concurrency,repeats,mean_sec,std_sec,speedup\n";
  for (const auto& r : results) {
    out << r.workload.total_bytes() << ',' << r.concurrency << ',' << r.repeats << ',' << format_double(r.meanSec)
        << ',' << format_double(r.stdSec) << ',' << format_double(table.at(r.workload.total_bytes(), r.concurrency))
        << '\n';
  }
}

std::vector<ResultsCsvRow> parse_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "workload_bytes,concurrency,repeats,mean_sec,std_sec,speedup")
    throw Error(ErrorCode::SchemaError, "unexpected results.csv header");
  std::vector<ResultsCsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
      cells.push_back(rest.substr(0, pos));
    cells.push_back(rest);
    if (cells.size() != 6) throw Error(ErrorCode::SchemaError, "results.csv row needs 6 cells: " + line);
    auto num = [&](std::string_view cell, auto& dst) {
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), dst);
      if (ec != std::errc{} || ptr != cell.data() + cell.size())
        throw Error(ErrorCode::SchemaError, "bad number '" + std::string(cell) + "' in results.csv");
    };
    ResultsCsvRow row;
    num(cells[0], row.workloadBytes);
    num(cells[1], row.concurrency);
    num(cells[2], row.repeats);
    num(cells[3], row.meanSec);
    num(cells[4], row.stdSec);
    num(cells[5], row.speedup);
    rows.push_back(row);
  }
  return rows;
}

void emit_report(std::span<const BenchResult> results, const SpeedupTable& table, const fs::path& outDir) {
  if (results.empty()) throw Error(ErrorCode::SinkFailure, "no benchmark results to report");
  std::error_code ec;
  fs::create_directories(outDir, ec);
  if (ec) throw Error(ErrorCode::SinkFailure, "cannot create " + outDir.string() + ": " + ec.message());

  auto open = [&](const char* name) {
    std::ofstream out(outDir / name, std::ios::trunc);
    if (!out) throw Error(ErrorCode::SinkFailure, "cannot write " + (outDir / name).string());
    return out;
  };

  {
    auto out = open("results.csv");
    write_results_csv(results, table, out);
    if (!out.flush()) throw Error(ErrorCode::SinkFailure, "write failed for results.csv");
  }
  {
    auto out = open("speedup.csv");
    out << "workload_bytes,file_count,concurrency,speedup\n";
    for (const auto& row : table.rows)
      out << row.workloadBytes << ',' << row.fileCount << ',' << row.concurrency << ',' << format_double(row.speedup)
          << '\n';
    if (!out.flush()) throw Error(ErrorCode::SinkFailure, "write failed for speedup.csv");
  }
  {
    nlohmann::ordered_json doc;
    doc["stdDefinition"] = "population standard deviation over repeats (divides by n)";
    doc["timingScope"] = "wall clock around corpus processing only; launch and file discovery excluded";
    doc["cacheState"] = "page cache not dropped between runs";
    nlohmann::ordered_json series = nlohmann::ordered_json::array();
    std::map<std::uint64_t, std::size_t> index;
    for (const auto& r : results) {
      const std::uint64_t bytes = r.workload.total_bytes();
      if (!index.count(bytes)) {
        index[bytes] = series.size();
        nlohmann::ordered_json s;
        s["workloadBytes"] = bytes;
        s["fileCount"] = r.workload.fileCount;
        s["points"] = nlohmann::ordered_json::array();
        series.push_back(s);
      }
      nlohmann::ordered_json p;
      p["concurrency"] = r.concurrency;
      p["repeats"] = r.repeats;
      p["meanSec"] = r.meanSec;
      p["stdSec"] = r.stdSec;
      p["speedup"] = table.at(bytes, r.concurrency);
      p["perRunSec"] = r.perRunSec;
      p["outputDigest"] = r.outputDigest;
      p["degenerate"] = r.degenerate;
      series[index[bytes]]["points"].push_back(p);
    }
    doc["series"] = series;
    auto out = open("series.json");
    out << doc.dump(2) << '\n';
    if (!out.flush()) throw Error(ErrorCode::SinkFailure, "write failed for series.json");
  }
}

}  // namespace pamforge
