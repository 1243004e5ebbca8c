#include "pamforge/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "pamforge/benchmark.hpp"
#include "pamforge/config.hpp"
#include "pamforge/error.hpp"
#include "pamforge/feature_pipeline.hpp"

#ifndef PAMFORGE_VERSION
#define PAMFORGE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace pamforge {

namespace {

struct ExecutorFlags {
  std::size_t numExecutors = 1;
  std::size_t executorCores = 1;
  double blockSizeMb = 64.0;
  std::size_t reservedCores = 1;
  std::size_t maxRetries = 2;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--num-executors", numExecutors, "Executors (slot groups)")->check(CLI::PositiveNumber);
    cmd.add_option("--executor-cores", executorCores, "Concurrent task slots per executor")->check(CLI::PositiveNumber);
    cmd.add_option("--block-size-mb", blockSizeMb, "Block size in MiB")->check(CLI::PositiveNumber);
    cmd.add_option("--reserved-cores", reservedCores, "Host cores left for the system");
    cmd.add_option("--max-retries", maxRetries, "Retries per failed task");
  }

  ExecutorConfig config() const {
    ExecutorConfig cfg;
    cfg.numExecutors = numExecutors;
    cfg.executorCores = executorCores;
    cfg.blockSizeBytes = static_cast<std::uint64_t>(std::llround(blockSizeMb * 1048576.0));
    cfg.reservedCores = reservedCores;
    cfg.maxRetries = maxRetries;
    cfg.validate();
    return cfg;
  }
};

struct ProcessArgs {
  std::string input;
  std::string output;
  std::string params = "set1";
  std::string timestampPattern;
  std::uint32_t expectedRate = 0;
  std::string multichannel = "first";
  std::string manifest;
  ExecutorFlags exec;
};

struct BenchArgs {
  std::size_t files = 4;
  std::string durationSec = "60";
  std::string concurrency = "1,2,4";
  std::size_t repeats = 3;
  std::string params = "set1";
  std::string out = "report";
  std::string workdir;
  std::uint32_t sampleRate = 32768;
  std::string signal = "noise";
  std::uint64_t seed = 42;
  bool warmup = false;
  ExecutorFlags exec;
};

struct ValidateArgs {
  std::string records;
  std::string reference;
  std::string domain = "linear";
  double threshold = 1e-12;
  bool absolute = false;
  bool allowMissing = false;
};

struct SynthArgs {
  std::string out;
  std::string outDir;
  std::size_t count = 1;
  std::string durationSec = "1";
  std::uint32_t sampleRate = 32768;
  std::string signal = "noise";
  double freq = 1000.0;
  double amplitude = 0.5;
  double variance = 0.01;
  std::uint64_t seed = 42;
};

Rational parse_duration(const std::string& text) {
  auto r = Rational::parse(text);
  if (!r || !r->positive()) throw Error(ErrorCode::SchemaError, "duration '" + text + "' is not a positive number");
  return *r;
}

SignalSpec make_signal(const std::string& kind, double freq, double amplitude, double variance, std::uint64_t seed) {
  if (kind == "silence") return Silence{};
  if (kind == "sine") return Sine{freq, amplitude};
  if (kind == "noise") return WhiteNoise{variance, seed};
  throw Error(ErrorCode::SchemaError, "signal must be silence, sine or noise");
}

bool is_wav(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav";
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::SinkFailure, "cannot write " + p.string());
}

int fatal_io(std::ostream& err, const std::exception& e) {
  err << "fatal I/O error: " << e.what() << '\n';
  return kExitFatalIo;
}

int run_process(ProcessArgs args, std::ostream& out, std::ostream& err) {
  AnalysisParams params;
  ExecutorConfig cfg;
  ChannelPolicy policy = ChannelPolicy::FirstChannel;
  TimestampPattern pattern;
  std::optional<std::uint32_t> expectedRate;
  try {
    if (!args.manifest.empty()) {
      const auto doc = ordered_json::parse(read_text(args.manifest));
      params = params_from_json(doc.at("params").dump());
      cfg = executor_from_json(doc.at("executor").dump());
      args.input = doc.at("inputDir").get<std::string>();
      args.multichannel = doc.at("channelPolicy").get<std::string>();
      args.timestampPattern = doc.at("timestampPattern").get<std::string>();
      args.expectedRate = doc.at("expectedSampleRateHz").get<std::uint32_t>();
    } else {
      params = load_params(args.params);
      cfg = args.exec.config();
    }
    if (args.multichannel == "error") policy = ChannelPolicy::RejectMultichannel;
    else if (args.multichannel != "first") throw Error(ErrorCode::SchemaError, "--multichannel must be first or error");
    pattern = TimestampPattern(args.timestampPattern);
    if (args.expectedRate) expectedRate = args.expectedRate;
    if (args.input.empty()) throw Error(ErrorCode::SchemaError, "--input is required");
    if (!fs::is_directory(args.input)) throw Error(ErrorCode::SchemaError, "input directory " + args.input + " does not exist");
  } catch (const Error& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const nlohmann::json::exception& e) {
    err << "configuration error: manifest: " << e.what() << '\n';
    return kExitConfigError;
  }

  std::vector<fs::path> wavs;
  for (const auto& entry : fs::directory_iterator(args.input))
    if (entry.is_regular_file() && is_wav(entry.path())) wavs.push_back(entry.path());
  std::sort(wavs.begin(), wavs.end());

  ordered_json skipped = ordered_json::array();
  std::vector<AudioFileMeta> metas;
  for (const auto& w : wavs) {
    try {
      AudioFileMeta m = read_wav_meta(w);
      if (policy == ChannelPolicy::RejectMultichannel && m.channels > 1)
        throw Error(ErrorCode::MultichannelInput, w.string() + " has " + std::to_string(m.channels) + " channels");
      metas.push_back(std::move(m));
    } catch (const Error& e) {
      spdlog::warn("skipping {}: {}", w.string(), e.what());
      skipped.push_back({{"file", w.filename().string()}, {"error", e.what()}});
    }
  }

  std::vector<PlannedFile> planned;
  try {
    for (const auto& m : metas) {
      if (expectedRate && m.sampleRateHz != *expectedRate)
        throw Error(ErrorCode::SampleRateMismatch, m.path + " is " + std::to_string(m.sampleRateHz) + " Hz, expected " +
                                                       std::to_string(*expectedRate));
    }
    assign_start_times(metas, pattern);
    for (const auto& m : metas) {
      params.bound_to(m.sampleRateHz);
      planned.push_back({m, plan_records(m, params.recordSizeSec)});
    }
    if (!planned.empty()) (void)split_into_blocks(planned, cfg);
  } catch (const Error& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  }

  if (wavs.empty()) spdlog::warn("no WAV files in {}", args.input);

  try {
    fs::create_directories(args.output);
  } catch (const fs::filesystem_error& e) {
    return fatal_io(err, e);
  }

  CorpusResult result;
  try {
    result = process_corpus(planned, params, cfg, policy);
  } catch (const Error& e) {
    err << "processing error: " << e.what() << '\n';
    return e.code() == ErrorCode::IoFailure ? kExitFatalIo : kExitConfigError;
  }

  ordered_json failedRecords = ordered_json::array();
  std::uint64_t written = 0;
  ordered_json outputs = ordered_json::array();
  try {
    for (const auto& f : result.files) {
      const fs::path dst = fs::path(args.output) / (fs::path(f.fileId).stem().string() + ".ndjson");
      std::ofstream sink(dst, std::ios::trunc);
      if (!sink) throw Error(ErrorCode::SinkFailure, "cannot create " + dst.string());
      serialize_records(f.records, sink);
      written += f.records.size();
      outputs.push_back({{"file", f.fileId}, {"output", dst.filename().string()}, {"records", f.records.size()},
                         {"failedRecords", f.failed_count()}});
      for (const auto& fr : f.failures)
        failedRecords.push_back({{"file", f.fileId},
                                 {"recordBegin", fr.recordBegin},
                                 {"recordEnd", fr.recordEnd},
                                 {"attempts", fr.attempts},
                                 {"error", fr.error}});
    }

    ordered_json manifest;
    manifest["tool"] = "pamforge";
    manifest["version"] = PAMFORGE_VERSION;
    manifest["command"] = "process";
    manifest["params"] = ordered_json::parse(params_to_json(params));
    manifest["executor"] = ordered_json::parse(executor_to_json(cfg));
    manifest["channelPolicy"] = policy == ChannelPolicy::FirstChannel ? "first" : "error";
    manifest["timestampPattern"] = pattern.pattern();
    manifest["expectedSampleRateHz"] = expectedRate.value_or(0);
    manifest["inputDir"] = fs::absolute(args.input).string();
    ordered_json inputs = ordered_json::array();
    for (const auto& w : wavs) inputs.push_back({{"file", w.filename().string()}, {"bytes", fs::file_size(w)}});
    manifest["inputs"] = inputs;
    manifest["outputs"] = outputs;
    write_text(fs::path(args.output) / "manifest.json", manifest.dump(2) + "\n");

    if (!skipped.empty() || !failedRecords.empty()) {
      const fs::path failures = fs::path(args.output) / "failures.json";
      ordered_json doc;
      doc["skippedFiles"] = skipped;
      doc["failedRecords"] = failedRecords;
      write_text(failures, doc.dump(2) + "\n");
      out << "processed " << result.files.size() << " file(s), " << written << " record(s); "
          << skipped.size() << " file(s) skipped, " << failedRecords.size() << " failed block(s)\n";
      out << "failure manifest: " << failures.string() << '\n';
      return kExitPartialFailure;
    }
  } catch (const std::exception& e) {
    return fatal_io(err, e);
  }
  out << "processed " << result.files.size() << " file(s), " << written << " record(s)\n";
  return kExitOk;
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size() || v == 0)
      throw Error(ErrorCode::SchemaError, "bad concurrency list '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::SchemaError, "empty concurrency list");
  return out;
}

int run_bench(const BenchArgs& args, std::ostream& out, std::ostream& err) {
  WorkloadSpec spec;
  std::vector<std::size_t> levels;
  AnalysisParams params;
  BenchOptions options;
  try {
    params = load_params(args.params);
    spec.fileCount = args.files;
    spec.perFileDurationSec = parse_duration(args.durationSec);
    spec.sampleRateHz = args.sampleRate;
    spec.signal = make_signal(args.signal, 1000.0, 0.5, 0.01, args.seed);
    levels = parse_list(args.concurrency);
    if (std::find(levels.begin(), levels.end(), 1u) == levels.end()) levels.insert(levels.begin(), 1);
    options.repeats = args.repeats;
    options.warmup = args.warmup;
    options.executor = args.exec.config();
    options.workDir = args.workdir.empty() ? fs::path(args.out) / "workload" : fs::path(args.workdir);
    options.runLog = fs::path(args.out) / "runs.csv";
    fs::create_directories(args.out);
  } catch (const Error& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const fs::filesystem_error& e) {
    return fatal_io(err, e);
  }
  try {
    const auto results = run_benchmark(spec, levels, params, options);
    const auto table = speedup(results);
    emit_report(results, table, args.out);
    write_results_csv(results, table, out);
    for (std::size_t i = 1; i < results.size(); ++i)
      if (results[i].outputDigest != results[0].outputDigest)
        spdlog::error("feature output differs between concurrency {} and {}", results[0].concurrency,
                      results[i].concurrency);
  } catch (const Error& e) {
    err << "benchmark failed: " << e.what() << '\n';
    return e.code() == ErrorCode::InsufficientDisk || e.code() == ErrorCode::IoFailure ||
                   e.code() == ErrorCode::SinkFailure
               ? kExitFatalIo
               : kExitConfigError;
  }
  return kExitOk;
}

int run_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err) {
  ValidationOptions options;
  options.threshold = args.threshold;
  options.relative = !args.absolute;
  options.allowMissing = args.allowMissing;
  if (args.domain == "db") options.domain = CompareDomain::Decibel;
  else if (args.domain != "linear") {
    err << "configuration error: --domain must be linear or db\n";
    return kExitConfigError;
  }
  std::vector<FeatureRecord> a, b;
  try {
    std::ifstream ia(args.records), ib(args.reference);
    if (!ia || !ib) throw Error(ErrorCode::IoFailure, "cannot open input files");
    a = parse_records(ia);
    b = parse_records(ib);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return e.code() == ErrorCode::IoFailure ? kExitFatalIo : kExitConfigError;
  }
  try {
    const auto r = validate_against_oracle(a, b, options);
    auto line = [&](const char* name, const FeatureError& e) {
      out << name << ": rmse=" << e.rmse << " relative=" << e.relativeRmse << " maxAbs=" << e.maxAbsError
          << " entries=" << e.entries << '\n';
    };
    line("welch", r.welch);
    line("tol", r.tol);
    line("spl", r.spl);
    out << "records=" << r.recordCount << " threshold=" << r.threshold << (r.relative ? " (relative)" : " (absolute)")
        << " -> " << (r.pass ? "PASS" : "FAIL") << '\n';
    return r.pass ? kExitOk : kExitValidationFailed;
  } catch (const Error& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

int run_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
  if (args.out.empty() == args.outDir.empty()) {
    err << "configuration error: give exactly one of --out or --out-dir\n";
    return kExitConfigError;
  }
  SynthSpec spec;
  try {
    spec.durationSec = parse_duration(args.durationSec);
    spec.sampleRateHz = args.sampleRate;
    spec.signal = make_signal(args.signal, args.freq, args.amplitude, args.variance, args.seed);
    (void)synthetic_sample_count(spec);
  } catch (const Error& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  }
  try {
    if (!args.out.empty()) {
      generate_synthetic_wav(spec, args.out);
      out << "wrote " << args.out << '\n';
    } else {
      WorkloadSpec w;
      w.fileCount = args.count;
      w.perFileDurationSec = spec.durationSec;
      w.sampleRateHz = spec.sampleRateHz;
      w.signal = spec.signal;
      fs::create_directories(args.outDir);
      for (std::size_t i = 0; i < args.count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "synth_%05zu.wav", i);
        generate_synthetic_wav(w.file_spec(i), fs::path(args.outDir) / name);
      }
      out << "wrote " << args.count << " file(s) to " << args.outDir << '\n';
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ClippingRequested || e.code() == ErrorCode::InvariantViolation) {
      err << "configuration error: " << e.what() << '\n';
      return kExitConfigError;
    }
    return fatal_io(err, e);
  } catch (const std::exception& e) {
    return fatal_io(err, e);
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  init_logging();
  CLI::App app{"pamforge: batch FFT features (Welch PSD, third-octave levels, SPL) for WAV corpora"};
  app.set_version_flag("--version", PAMFORGE_VERSION);
  app.require_subcommand(1);

  ProcessArgs pa;
  auto* process = app.add_subcommand("process", "Compute features for every WAV in a directory");
  process->add_option("--input", pa.input, "Input directory of WAV files");
  process->add_option("--output", pa.output, "Output directory")->required();
  process->add_option("--params", pa.params, "Preset (set1, set2) or parameter JSON file");
  process->add_option("--timestamp-pattern", pa.timestampPattern, "Filename timestamp pattern, e.g. %Y%m%d_%H%M%S");
  process->add_option("--expected-rate", pa.expectedRate, "Fail unless every file has this sample rate");
  process->add_option("--multichannel", pa.multichannel, "first (use channel 0) or error");
  process->add_option("--manifest", pa.manifest, "Re-run with the settings of a previous manifest.json");
  pa.exec.add_to(*process);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Time a synthetic workload across concurrency levels");
  bench->add_option("--files", ba.files, "Number of synthetic files");
  bench->add_option("--duration-sec", ba.durationSec, "Duration of each file in seconds");
  bench->add_option("--concurrency", ba.concurrency, "Comma-separated concurrency levels");
  bench->add_option("--repeats", ba.repeats, "Timed runs per configuration")->check(CLI::PositiveNumber);
  bench->add_option("--params", ba.params, "Preset (set1, set2) or parameter JSON file");
  bench->add_option("--out", ba.out, "Report directory");
  bench->add_option("--workdir", ba.workdir, "Where synthetic files are generated");
  bench->add_option("--sample-rate", ba.sampleRate, "Sample rate of the synthetic files");
  bench->add_option("--signal", ba.signal, "silence, sine or noise");
  bench->add_option("--seed", ba.seed, "Noise seed");
  bench->add_flag("--warmup", ba.warmup, "Run one untimed pass per configuration first");
  ba.exec.add_to(*bench);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Compare two feature files (RMSE per feature family)");
  validate->add_option("--records", va.records, "Feature NDJSON to check")->required();
  validate->add_option("--reference", va.reference, "Reference feature NDJSON")->required();
  validate->add_option("--domain", va.domain, "linear or db");
  validate->add_option("--threshold", va.threshold, "Pass threshold on the RMSE");
  validate->add_flag("--absolute", va.absolute, "Threshold the absolute instead of relative RMSE");
  validate->add_flag("--allow-missing", va.allowMissing, "Compare only records present in both files");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Write deterministic synthetic 16-bit WAV files");
  synth->add_option("--out", sa.out, "Output WAV file");
  synth->add_option("--out-dir", sa.outDir, "Output directory for --count files");
  synth->add_option("--count", sa.count, "Number of files with --out-dir");
  synth->add_option("--duration-sec", sa.durationSec, "Duration in seconds");
  synth->add_option("--sample-rate", sa.sampleRate, "Sample rate in Hz");
  synth->add_option("--signal", sa.signal, "silence, sine or noise");
  synth->add_option("--freq", sa.freq, "Sine frequency in Hz");
  synth->add_option("--amplitude", sa.amplitude, "Sine amplitude (<= 1)");
  synth->add_option("--variance", sa.variance, "Noise variance");
  synth->add_option("--seed", sa.seed, "Noise seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code != 0) err << app.help();
    return code == 0 ? kExitOk : kExitConfigError;
  }

  if (*process) return run_process(pa, out, err);
  if (*bench) return run_bench(ba, out, err);
  if (*validate) return run_validate(va, out, err);
  return run_synth(sa, out, err);
}

}  // namespace pamforge
