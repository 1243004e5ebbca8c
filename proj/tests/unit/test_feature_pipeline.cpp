#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "../oracle/oracle.hpp"
#include "pamforge/error.hpp"
#include "pamforge/feature_pipeline.hpp"
#include "test_util.hpp"

using namespace pamforge;
using pamforge::testing::random_signal;
using pamforge::testing::TempDir;

namespace {

AnalysisParams small_params() {
  AnalysisParams p;
  p.nfft = 256;
  p.windowSize = 256;
  p.windowOverlap = 128;
  return p;
}

std::vector<PlannedFile> make_corpus(const TempDir& dir, std::size_t files, Rational dur, std::uint32_t rate,
                                     const AnalysisParams& p) {
  std::vector<PlannedFile> out;
  for (std::size_t i = 0; i < files; ++i) {
    const auto path = dir / ("f" + std::to_string(i) + ".wav");
    generate_synthetic_wav({dur, rate, WhiteNoise{0.01, 100 + i}}, path);
    auto meta = read_wav_meta(path);
    out.push_back({meta, plan_records(meta, p.recordSizeSec)});
  }
  return out;
}

std::string ndjson(const CorpusResult& r) {
  std::ostringstream os;
  for (const auto& f : r.files) serialize_records(f.records, os);
  return os.str();
}

}  // namespace

TEST_CASE("process_record shapes and levels") {
  AnalysisParams p = small_params().bound_to(8000);
  SampleBuffer buf;
  buf.samples.assign(8000, 0.0);
  buf.recordIndex = 4;
  const auto silent = process_record(buf, p);
  CHECK(silent.recordIndex == 4);
  CHECK(silent.spl == kDefaultDbFloor);
  CHECK(silent.welch.size() == 129);
  CHECK(silent.welchFrameCount == 61);
  CHECK(silent.tol.size() == reported_tol_bands(p).size());
  for (double v : silent.welch) CHECK(v == kDefaultDbFloor);
  CHECK(silent.paramsHash == p.fingerprint());

  buf.samples.resize(7999);
  CHECK_THROWS_AS(process_record(buf, p), Error);
}

TEST_CASE("engine matches the oracle on random records") {
  for (auto preset : {1, 2}) {
    AnalysisParams p = small_params();
    if (preset == 2) {
      p.nfft = 1024;
      p.windowSize = 1024;
      p.windowOverlap = 0;
    }
    p = p.bound_to(4096);
    SampleBuffer buf;
    buf.samples = random_signal(4096, 31 + preset, 0.2);
    const auto got = process_record(buf, p);
    const auto want = oracle::record(buf, p, "");
    ValidationOptions opt;
    const auto report = validate_against_oracle(std::span(&got, 1), std::span(&want, 1), opt);
    CHECK_MESSAGE(report.pass, "welch " << report.welch.relativeRmse << " tol " << report.tol.relativeRmse);
  }
}

TEST_CASE("TOL does not depend on the record size") {
  AnalysisParams p1 = small_params();
  AnalysisParams p3 = small_params();
  p3.recordSizeSec = Rational(3);
  const auto x = random_signal(3 * 2048, 3, 0.1);
  SampleBuffer b3;
  b3.samples = x;
  const auto r3 = process_record(b3, p3.bound_to(2048));
  CHECK(r3.tolSubRecords == 3);

  // Mean of the three per-second band powers equals the 3-s TOL.
  const auto bands = reported_tol_bands(p1.bound_to(2048));
  std::vector<double> meanPower(bands.size(), 0.0);
  for (int s = 0; s < 3; ++s) {
    SampleBuffer b1;
    b1.samples.assign(x.begin() + s * 2048, x.begin() + (s + 1) * 2048);
    const auto r1 = process_record(b1, p1.bound_to(2048));
    for (std::size_t i = 0; i < bands.size(); ++i) meanPower[i] += std::pow(10.0, r1.tol[i] / 10.0) / 3.0;
  }
  REQUIRE(r3.tol.size() == bands.size());
  for (std::size_t i = 0; i < bands.size(); ++i)
    CHECK(std::pow(10.0, r3.tol[i] / 10.0) == doctest::Approx(meanPower[i]).epsilon(1e-10));
}

TEST_CASE("NDJSON layout") {
  AnalysisParams p;
  p.nfft = 8;
  p.windowSize = 8;
  p.windowOverlap = 4;
  p = p.bound_to(8);
  SampleBuffer buf;
  buf.samples.assign(8, 0.0);
  buf.timestamp = *parse_iso8601("2010-10-01T13:05:07.250Z");
  auto rec = process_record(buf, p);
  rec.fileId = "a.wav";
  const std::string line = serialize_record(rec);
  const auto obj = nlohmann::ordered_json::parse(line);
  std::vector<std::string> keys;
  for (auto it = obj.begin(); it != obj.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"timestamp", "file", "record", "spl", "welch", "tol", "paramsHash"});
  CHECK(obj["welch"].size() == 5);
  CHECK(obj["timestamp"] == "2010-10-01T13:05:07.250Z");
  CHECK(line.find("\"spl\":-1000.0") != std::string::npos);
  CHECK(line.find('\n') == std::string::npos);

  const auto back = parse_record(line);
  CHECK(back.welch == rec.welch);
  CHECK(back.tol == rec.tol);
  CHECK(back.spl == rec.spl);
  CHECK(back.timestamp == rec.timestamp);
  CHECK(serialize_record(back) == line);

  rec.welch[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(serialize_record(rec), Error);
  CHECK_THROWS_AS(parse_record("{\"file\":1}"), Error);
  CHECK_THROWS_AS(parse_record("not json"), Error);
}

TEST_CASE("corpus output is independent of worker count") {
  TempDir dir("det");
  const AnalysisParams p = small_params();
  const auto files = make_corpus(dir, 3, Rational(5), 4096, p);
  ExecutorConfig serial;
  serial.blockSizeBytes = 2 * 8192;
  ExecutorConfig wide = serial;
  wide.numExecutors = 4;
  wide.executorCores = 2;
  const auto a = process_corpus(files, p, serial);
  const auto b = process_corpus(files, p, wide);
  CHECK(a.complete());
  CHECK(b.complete());
  CHECK(ndjson(a) == ndjson(b));
  for (const auto& f : a.files) {
    CHECK(f.records.size() == 5);
    for (std::size_t i = 0; i < f.records.size(); ++i) CHECK(f.records[i].recordIndex == i);
  }
  const auto single = process_file(files[1].meta, files[1].plan, p, serial);
  std::ostringstream os;
  serialize_records(single.records, os);
  std::ostringstream ref;
  serialize_records(a.files[1].records, ref);
  CHECK(os.str() == ref.str());
}

TEST_CASE("failed blocks are accounted for") {
  TempDir dir("fail");
  const AnalysisParams p = small_params();
  auto files = make_corpus(dir, 2, Rational(4), 4096, p);
  // Truncate the second file after planning so its later records cannot be read.
  std::filesystem::resize_file(files[1].meta.path, 44 + 2 * 4096 * 2);
  ExecutorConfig cfg;
  cfg.blockSizeBytes = 8192;
  cfg.maxRetries = 1;
  const auto res = process_corpus(files, p, cfg);
  CHECK(!res.complete());
  for (const auto& f : res.files) CHECK(f.records.size() + f.failed_count() == f.plannedRecords);
  CHECK(res.files[0].failures.empty());
  CHECK(res.files[1].records.size() == 2);
  REQUIRE(res.files[1].failures.size() == 2);
  CHECK(res.files[1].failures[0].attempts == 2);
}

TEST_CASE("validation against a reference") {
  AnalysisParams p = small_params().bound_to(2048);
  std::vector<FeatureRecord> engine, ref;
  for (std::uint64_t i = 0; i < 3; ++i) {
    SampleBuffer buf;
    buf.samples = random_signal(2048, 50 + i, 0.3);
    buf.recordIndex = i;
    auto r = process_record(buf, p);
    r.fileId = "x.wav";
    engine.push_back(r);
    ref.push_back(oracle::record(buf, p, "x.wav"));
  }
  const auto self = validate_against_oracle(engine, engine);
  CHECK(self.pass);
  CHECK(self.maxAbsError == 0.0);
  const auto vs = validate_against_oracle(engine, ref);
  CHECK(vs.pass);
  CHECK(vs.welch.relativeRmse <= 1e-12);

  auto planted = engine;
  planted[1].welch[10] += 10.0 * std::log10(1.0 + 1e-6);
  CHECK(!validate_against_oracle(planted, ref).pass);

  auto shortSet = engine;
  shortSet.pop_back();
  CHECK_THROWS_AS(validate_against_oracle(shortSet, ref), Error);
  ValidationOptions loose;
  loose.allowMissing = true;
  CHECK(validate_against_oracle(shortSet, ref, loose).recordCount == 2);

  auto wrongHash = engine;
  wrongHash[0].paramsHash = "0000";
  CHECK_THROWS_AS(validate_against_oracle(wrongHash, ref), Error);
}
