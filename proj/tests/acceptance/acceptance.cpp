// Acceptance suite. Each criterion prints one PASS/FAIL line; the exit status
// is non-zero if any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oracle.hpp"
#include "pamforge/audio_ingest.hpp"
#include "pamforge/benchmark.hpp"
#include "pamforge/config.hpp"
#include "pamforge/dsp.hpp"
#include "pamforge/error.hpp"
#include "pamforge/feature_pipeline.hpp"

namespace fs = std::filesystem;
using namespace pamforge;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budgetSec;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("pamforge-acceptance-" + tag);
  fs::create_directories(p);
  return p;
}

std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sigma) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

AnalysisParams set(int which) {
  AnalysisParams p = *preset(which == 1 ? "set1" : "set2");
  return p;
}

// 1 ---------------------------------------------------------------------------
Outcome oracle_equivalence() {
  double worst = 0.0;
  bool pass = true;
  for (int which : {1, 2}) {
    AnalysisParams p = set(which);
    p.recordSizeSec = Rational(1);
    p = p.bound_to(32768);
    RecordProcessor processor(p);
    std::vector<FeatureRecord> engine, reference;
    for (std::uint64_t i = 0; i < 20; ++i) {
      SampleBuffer buf;
      buf.samples = gaussian(32768, 1000 * which + i, 0.1);
      buf.recordIndex = i;
      FeatureRecord r = processor.process(buf);
      r.fileId = "random.wav";
      engine.push_back(std::move(r));
      reference.push_back(oracle::record(buf, p, "random.wav"));
    }
    ValidationOptions opt;
    opt.domain = CompareDomain::Linear;
    opt.threshold = 1e-12;
    opt.relative = true;
    const auto rep = validate_against_oracle(engine, reference, opt);
    worst = std::max({worst, rep.welch.relativeRmse, rep.tol.relativeRmse, rep.spl.relativeRmse});
    pass = pass && rep.pass && rep.recordCount == 20;
  }
  return {pass, fmt("worst relative RMSE %.3g over welch/tol/spl, both presets", worst)};
}

// 2 ---------------------------------------------------------------------------
Outcome record_accounting() {
  const fs::path dir = scratch("c2");
  const fs::path path = dir / "long_45min.wav";
  generate_synthetic_wav({Rational(45 * 60), 32768, WhiteNoise{0.01, 7}}, path);
  AudioFileMeta meta = read_wav_meta(path);
  const bool samplesOk = meta.totalSamples == 88'473'600;

  struct Expect {
    int which;
    std::uint64_t records;
    std::size_t frames;
  };
  bool pass = samplesOk;
  std::string detail = fmt("%llu samples", static_cast<unsigned long long>(meta.totalSamples));
  for (const Expect& e : {Expect{1, 2700, 255}, Expect{2, 90, 960}}) {
    const AnalysisParams p = set(e.which).bound_to(meta.sampleRateHz);
    const RecordPlan plan = plan_records(meta, p.recordSizeSec);
    const FramePlan frames = segment_frames(p.record_samples(), p.windowSize, p.windowOverlap);
    ExecutorConfig cfg;
    const FileFeatures out = process_file(meta, plan, p, cfg);
    bool framesOk = out.records.size() == e.records;
    for (const auto& r : out.records) framesOk = framesOk && r.welchFrameCount == e.frames;
    const bool ok = plan.recordCount == e.records && plan.droppedTailSamples == 0 && frames.count == e.frames &&
                    framesOk && out.failures.empty();
    pass = pass && ok;
    detail += fmt("; set%d: %llu records x %zu frames (%llu frames total)", e.which,
                  static_cast<unsigned long long>(plan.recordCount), frames.count,
                  static_cast<unsigned long long>(plan.recordCount * frames.count));
  }
  fs::remove_all(dir);
  return {pass, detail};
}

// 3 ---------------------------------------------------------------------------
Outcome parseval() {
  double worst = 0.0;
  std::mt19937_64 rng(3);
  const std::size_t shapes[][2] = {{256, 256}, {1024, 1024}, {200, 256}, {1000, 1000}, {255, 255}};
  for (auto type : {WindowType::Hamming, WindowType::Rectangular}) {
    for (int f = 0; f < 1000; ++f) {
      const auto& shape = shapes[f % 5];
      const std::size_t win = shape[0], nfft = shape[1];
      const auto w = make_window(type, win);
      const auto x = gaussian(win, rng(), 0.3);
      const auto psd = periodogram(x, w, nfft, 32768);
      double windowed = 0.0;
      for (std::size_t n = 0; n < win; ++n) windowed += (x[n] * w.coeffs[n]) * (x[n] * w.coeffs[n]);
      windowed /= w.sumSquares;
      worst = std::max(worst, std::abs(total_power(psd) - windowed) / windowed);
    }
  }
  return {worst <= 1e-12, fmt("worst relative error %.3g over 2000 frames", worst)};
}

// 4 ---------------------------------------------------------------------------
Outcome tol_structure() {
  // Flat density fine enough that every band holds hundreds of bins.
  const std::size_t nfft = 1 << 20;
  const std::uint32_t fs = 1024;
  PsdVector flat{std::vector<double>(nfft / 2 + 1, 1e-4), static_cast<double>(fs) / nfft, 1};
  const auto flatTol = tol(std::span<const PsdVector>(&flat, 1), tol_band_table(fs, Rational(1)), 1.0, 0.0);
  double worstRatio = 0.0;
  for (std::size_t i = 1; i < flatTol.bandPowers.size(); ++i)
    worstRatio = std::max(worstRatio, std::abs(flatTol.bandPowers[i] / flatTol.bandPowers[i - 1] / std::pow(10.0, 0.1) - 1.0));
  const bool flatOk = flatTol.bandPowers.size() >= 2 && worstRatio <= 0.02;

  AnalysisParams p = set(2);
  p.recordSizeSec = Rational(1);
  p = p.bound_to(32768);
  SampleBuffer buf;
  buf.samples.resize(32768);
  for (std::size_t n = 0; n < buf.samples.size(); ++n)
    buf.samples[n] = 0.5 * std::sin(2.0 * std::numbers::pi * 1000.0 * static_cast<double>(n) / 32768.0);
  const FeatureRecord rec = process_record(buf, p);
  const auto bands = reported_tol_bands(p);
  std::size_t peak = 0;
  for (std::size_t i = 1; i < rec.tol.size(); ++i)
    if (rec.tol[i] > rec.tol[peak]) peak = i;
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rec.tol.size(); ++i)
    if (i != peak) margin = std::min(margin, rec.tol[peak] - rec.tol[i]);
  const bool sineOk = bands.size() == rec.tol.size() && bands[peak].index == 30 && margin >= 30.0;
  return {flatOk && sineOk, fmt("flat: %zu bands, worst ratio deviation %.3g%%; sine: peak band n=%d, next band %.1f dB down",
                                flatTol.bandPowers.size(), 100.0 * worstRatio, bands.empty() ? -1 : bands[peak].index,
                                margin)};
}

// 5 ---------------------------------------------------------------------------
Outcome determinism() {
  const fs::path dir = scratch("c5");
  const AnalysisParams params = set(1);
  std::vector<AudioFileMeta> metas;
  for (int i = 0; i < 6; ++i) {
    const fs::path p = dir / fmt("corpus_%02d.wav", i);
    generate_synthetic_wav({Rational(20), 32768, WhiteNoise{0.01, static_cast<std::uint64_t>(i)}}, p);
    metas.push_back(read_wav_meta(p));
  }
  assign_start_times(metas, TimestampPattern{});
  std::vector<PlannedFile> files;
  for (const auto& m : metas) files.push_back({m, plan_records(m, params.recordSizeSec)});

  auto run_once = [&](std::size_t concurrency) {
    ExecutorConfig cfg;
    cfg.numExecutors = concurrency;
    cfg.executorCores = 1;
    cfg.blockSizeBytes = 3 * 65536;  // three records per task
    const CorpusResult res = process_corpus(files, params, cfg);
    std::ostringstream os;
    for (const auto& f : res.files) serialize_records(f.records, os);
    return std::make_pair(res.complete(), os.str());
  };
  const auto base = run_once(1);
  bool pass = base.first && !base.second.empty();
  std::string detail = fmt("%zu bytes of NDJSON", base.second.size());
  for (std::size_t n : {1u, 2u, 8u}) {
    for (int rep = 0; rep < 2; ++rep) {
      const auto again = run_once(n);
      const bool same = again.first && again.second == base.second;
      pass = pass && same;
      if (!same) detail += fmt("; concurrency %zu run %d differs", n, rep + 1);
    }
  }
  fs::remove_all(dir);
  return {pass, detail + "; concurrency 1, 2, 8 x 2 runs compared"};
}

// 6 ---------------------------------------------------------------------------
Outcome scaling_shape() {
  const unsigned hostCores = std::thread::hardware_concurrency();
  const AnalysisParams params = set(1);
  BenchOptions opt;
  opt.repeats = 3;
  opt.workDir = scratch("c6");
  const std::vector<std::size_t> conc = {1, 2, 4};

  WorkloadSpec big;
  big.fileCount = 64;
  big.perFileDurationSec = Rational(60);
  WorkloadSpec small = big;
  small.fileCount = 2;

  auto results = run_benchmark(big, conc, params, opt);
  const auto smallResults = run_benchmark(small, conc, params, opt);
  results.insert(results.end(), smallResults.begin(), smallResults.end());
  const SpeedupTable table = speedup(results);
  emit_report(results, table, fs::current_path() / "criterion6_report");

  const double s1 = table.at(big.total_bytes(), 1);
  const double s2 = table.at(big.total_bytes(), 2);
  const double s4 = table.at(big.total_bytes(), 4);
  const double small4 = table.at(small.total_bytes(), 4);
  const bool hostOk = hostCores >= 8;
  const bool pass = hostOk && s1 == 1.0 && s2 >= s1 && s4 >= s2 && s4 >= 2.0 && small4 < s4;
  return {pass, fmt("host cores %u (need >= 8); 64 files: S(1)=%.3f S(2)=%.3f S(4)=%.3f (need >= 2); 2 files: S(4)=%.3f",
                    hostCores, s1, s2, s4, small4)};
}

// 7 ---------------------------------------------------------------------------
Outcome protocol_fidelity() {
  const fs::path dir = scratch("c7");
  WorkloadSpec w;
  w.fileCount = 2;
  w.perFileDurationSec = Rational(10);
  BenchOptions opt;
  opt.workDir = dir / "work";
  opt.runLog = dir / "runs.csv";
  fs::remove(opt.runLog);
  const std::vector<std::size_t> conc = {1, 2};
  const auto results = run_benchmark(w, conc, set(1), opt);
  const auto table = speedup(results);
  emit_report(results, table, dir / "report");

  bool pass = results.size() == 2;
  for (const auto& r : results) {
    const auto [mean, sd] = mean_and_std(r.perRunSec);
    pass = pass && r.repeats == 3 && r.perRunSec.size() == 3 && r.meanSec == mean && r.stdSec == sd;
  }
  std::ifstream csv(dir / "report" / "results.csv");
  const auto rows = parse_results_csv(csv);
  pass = pass && rows.size() == results.size();
  for (std::size_t i = 0; pass && i < rows.size(); ++i) {
    pass = rows[i].workloadBytes == results[i].workload.total_bytes() && rows[i].concurrency == results[i].concurrency &&
           rows[i].repeats == 3 && rows[i].meanSec == results[i].meanSec && rows[i].stdSec == results[i].stdSec &&
           rows[i].speedup == table.at(rows[i].workloadBytes, rows[i].concurrency);
  }
  std::ifstream js(dir / "report" / "series.json");
  const auto doc = nlohmann::json::parse(js);
  for (const auto& point : doc.at("series").at(0).at("points"))
    pass = pass && point.at("perRunSec").size() == 3 && point.contains("stdSec") && point.contains("meanSec");
  std::size_t logLines = 0;
  std::ifstream log(opt.runLog);
  for (std::string line; std::getline(log, line);) ++logLines;
  pass = pass && logLines == 1 + 6;
  fs::remove_all(dir);
  return {pass, fmt("%zu configurations, 3 runs each; results.csv round-trips exactly; %zu run-log lines", results.size(),
                    logLines)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pamforge acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-7); default all")->check(CLI::Range(1, 7));
  CLI11_PARSE(app, argc, argv);
  init_logging("warn");

  const std::vector<Criterion> all = {
      {1, "oracle equivalence", 120, oracle_equivalence},
      {2, "record accounting", 300, record_accounting},
      {3, "Parseval", 30, parseval},
      {4, "TOL structure", 30, tol_structure},
      {5, "determinism", 300, determinism},
      {6, "scaling shape", 1200, scaling_shape},
      {7, "benchmark protocol", 300, protocol_fidelity},
  };

  bool allPass = true;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool inBudget = sec <= c.budgetSec;
    const bool pass = o.pass && inBudget;
    allPass = allPass && pass;
    std::printf("criterion %d %s: %s (%s; %.1f s of %.0f s budget)\n", c.id, c.name, pass ? "PASS" : "FAIL",
                o.detail.c_str(), sec, c.budgetSec);
    std::fflush(stdout);
  }
  return allPass ? 0 : 1;
}
