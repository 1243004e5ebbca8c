#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pamforge/audio_ingest.hpp"
#include "pamforge/dsp.hpp"
#include "pamforge/executor.hpp"

namespace pamforge {

// One integration segment. All levels are dB re dbReference^2, calibrated.
struct FeatureRecord {
  UtcTime timestamp{};
  std::string fileId;
  std::uint64_t recordIndex = 0;
  double spl = kDefaultDbFloor;
  std::vector<double> welch;
  std::vector<double> tol;
  std::string paramsHash;
  // Diagnostics, not serialized.
  std::size_t welchFrameCount = 0;
  std::size_t tolSubRecords = 0;
};

// Computes FeatureRecords for one bound parameter set. Holds FFT scratch, so
// use one per worker.
class RecordProcessor {
 public:
  explicit RecordProcessor(const AnalysisParams& boundParams);

  FeatureRecord process(const SampleBuffer& buffer);

  const AnalysisParams& params() const noexcept { return params_; }
  const TolBandTable& band_table() const noexcept { return table_; }

 private:
  AnalysisParams params_;
  std::string hash_;
  TolBandTable table_;
  WelchEstimator welch_;
};

FeatureRecord process_record(const SampleBuffer& buffer, const AnalysisParams& boundParams);

// Bands that receive at least one FFT bin, i.e. those the tol vector reports.
std::vector<TolBand> reported_tol_bands(const AnalysisParams& boundParams);

struct FailedRecords {
  std::uint64_t recordBegin = 0;
  std::uint64_t recordEnd = 0;
  std::size_t attempts = 0;
  std::string error;
};

struct FileFeatures {
  std::string fileId;
  std::string path;
  std::uint64_t plannedRecords = 0;
  std::vector<FeatureRecord> records;  // ascending recordIndex
  std::vector<FailedRecords> failures;

  std::uint64_t failed_count() const;
};

struct CorpusResult {
  std::vector<FileFeatures> files;  // same order as the input
  RunStats stats;

  bool complete() const;
};

// Splits every file into blocks, runs them on the pool, and merges each
// file's records back into recordIndex order.
CorpusResult process_corpus(std::span<const PlannedFile> files, const AnalysisParams& params,
                            const ExecutorConfig& cfg, ChannelPolicy policy = ChannelPolicy::FirstChannel);

FileFeatures process_file(const AudioFileMeta& meta, const RecordPlan& plan, const AnalysisParams& params,
                          const ExecutorConfig& cfg, ChannelPolicy policy = ChannelPolicy::FirstChannel);

std::string file_id_for(const AudioFileMeta& meta);

// --- NDJSON -------------------------------------------------------------------

std::string serialize_record(const FeatureRecord& record);
void serialize_records(std::span<const FeatureRecord> records, std::ostream& sink);
FeatureRecord parse_record(std::string_view line);
std::vector<FeatureRecord> parse_records(std::istream& in);

// --- Cross-validation ---------------------------------------------------------

enum class CompareDomain { Linear, Decibel };

struct FeatureError {
  double rmse = 0.0;
  double relativeRmse = 0.0;  // rmse over the RMS of the reference values
  double maxAbsError = 0.0;
  std::size_t entries = 0;
};

struct ValidationReport {
  FeatureError welch;
  FeatureError tol;
  FeatureError spl;
  double maxAbsError = 0.0;
  std::size_t recordCount = 0;
  double threshold = 0.0;
  bool relative = true;
  bool pass = false;
};

struct ValidationOptions {
  CompareDomain domain = CompareDomain::Linear;
  double threshold = 1e-12;
  bool relative = true;
  // Compare only records present in both sets instead of requiring equal sets.
  bool allowMissing = false;
};

ValidationReport validate_against_oracle(std::span<const FeatureRecord> records,
                                         std::span<const FeatureRecord> oracleRecords,
                                         const ValidationOptions& options = {});

}  // namespace pamforge
