#include "pamforge/feature_pipeline.hpp"

#include <algorithm>
#include <map>

#include <spdlog/spdlog.h>

#include "pamforge/error.hpp"

namespace pamforge {

RecordProcessor::RecordProcessor(const AnalysisParams& boundParams)
    : params_(boundParams),
      hash_(boundParams.fingerprint()),
      table_(tol_band_table(boundParams.sampleRateHz, boundParams.tolWindowSec)),
      welch_(boundParams) {
  params_.validate_bound();
}

FeatureRecord RecordProcessor::process(const SampleBuffer& buffer) {
  const std::size_t recordLen = params_.record_samples();
  if (buffer.samples.size() != recordLen)
    throw Error(ErrorCode::LengthMismatch, "record has " + std::to_string(buffer.samples.size()) +
                                               " samples, expected " + std::to_string(recordLen));
  const std::span<const double> samples(buffer.samples);

  // Integration over the whole record.
  const PsdVector recordPsd = welch_.estimate(samples);

  // Second segmentation: consecutive TOL windows aligned to the record start.
  const std::size_t sub = params_.tol_window_samples();
  const std::size_t subCount = recordLen / sub;
  std::vector<PsdVector> subPsds;
  subPsds.reserve(subCount);
  if (subCount == 1 && sub == recordLen) {
    subPsds.push_back(recordPsd);
  } else {
    for (std::size_t s = 0; s < subCount; ++s) subPsds.push_back(welch_.estimate(samples.subspan(s * sub, sub)));
  }
  const TolVector tolVec = tol(subPsds, table_, params_.dbReference, params_.calibrationDb);

  FeatureRecord rec;
  rec.timestamp = buffer.timestamp;
  rec.recordIndex = buffer.recordIndex;
  rec.paramsHash = hash_;
  rec.welchFrameCount = recordPsd.frameCount;
  rec.tolSubRecords = subCount;
  rec.welch.reserve(recordPsd.values.size());
  for (double p : recordPsd.values) rec.welch.push_back(level_db(p, params_.dbReference, params_.calibrationDb));
  rec.tol = tolVec.values;
  const double power = total_power(recordPsd);
  if (power == 0.0) spdlog::debug("record {} has zero power; levels set to the dB floor", buffer.recordIndex);
  rec.spl = level_db(power, params_.dbReference, params_.calibrationDb);
  return rec;
}

FeatureRecord process_record(const SampleBuffer& buffer, const AnalysisParams& boundParams) {
  RecordProcessor processor(boundParams);
  return processor.process(buffer);
}

std::vector<TolBand> reported_tol_bands(const AnalysisParams& boundParams) {
  const TolBandTable table = tol_band_table(boundParams.sampleRateHz, boundParams.tolWindowSec);
  std::vector<TolBand> out;
  for (const auto& b : table.bands) {
    const BinRange r = band_bins(b, boundParams.bin_width_hz(), boundParams.bin_count());
    if (r.first != r.last) out.push_back(b);
  }
  return out;
}

std::uint64_t FileFeatures::failed_count() const {
  std::uint64_t n = 0;
  for (const auto& f : failures) n += f.recordEnd - f.recordBegin;
  return n;
}

bool CorpusResult::complete() const {
  return std::all_of(files.begin(), files.end(), [](const FileFeatures& f) { return f.failures.empty(); });
}

std::string file_id_for(const AudioFileMeta& meta) { return std::filesystem::path(meta.path).filename().string(); }

namespace {

void log_parameter_summary(const AnalysisParams& p, const PlannedFile& file) {
  const std::size_t recordLen = p.record_samples();
  const FramePlan frames = segment_frames(recordLen, p.windowSize, p.windowOverlap);
  const TolBandTable table = tol_band_table(p.sampleRateHz, p.tolWindowSec);
  const auto reported = reported_tol_bands(p);
  spdlog::info("params {} @ {} Hz: {} frames per record, {} per file of {} records; {} of {} TOL bands populated",
               p.fingerprint(), p.sampleRateHz, frames.count, frames.count * file.plan.recordCount,
               file.plan.recordCount, reported.size(), table.bands.size());
  if (reported.size() != table.bands.size())
    spdlog::info("{} TOL bands hold no FFT bin at {:.3f} Hz resolution and are excluded",
                 table.bands.size() - reported.size(), p.bin_width_hz());
}

}  // namespace

CorpusResult process_corpus(std::span<const PlannedFile> files, const AnalysisParams& params,
                            const ExecutorConfig& cfg, ChannelPolicy policy) {
  params.validate();
  std::vector<AnalysisParams> bound;
  bound.reserve(files.size());
  std::map<std::string, bool> summarized;
  for (const auto& f : files) {
    if (f.plan.recordSizeSec != params.recordSizeSec)
      throw Error(ErrorCode::ParamsMismatch, f.meta.path + " was planned with a different record size");
    bound.push_back(params.bound_to(f.meta.sampleRateHz));
    if (!summarized[bound.back().fingerprint()] && f.plan.recordCount > 0) {
      summarized[bound.back().fingerprint()] = true;
      log_parameter_summary(bound.back(), f);
    }
  }

  const auto tasks = split_into_blocks(files, cfg);
  std::function<std::vector<FeatureRecord>(const TaskDescriptor&)> taskFn = [&](const TaskDescriptor& t) {
    const PlannedFile& file = files[t.fileId];
    RecordProcessor processor(bound[t.fileId]);
    RecordReader reader(file.meta, policy);
    const std::string fileId = file_id_for(file.meta);
    std::vector<FeatureRecord> out;
    out.reserve(t.record_count());
    for (std::uint64_t r = t.recordBegin; r < t.recordEnd; ++r) {
      FeatureRecord rec = processor.process(reader.read(file.plan, r));
      rec.fileId = fileId;
      out.push_back(std::move(rec));
    }
    return out;
  };
  auto outcome = run(std::span<const TaskDescriptor>(tasks), cfg, taskFn);

  CorpusResult result;
  result.stats = outcome.stats;
  result.files.resize(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    result.files[i].fileId = file_id_for(files[i].meta);
    result.files[i].path = files[i].meta.path;
    result.files[i].plannedRecords = files[i].plan.recordCount;
  }
  for (auto& r : outcome.results) {
    auto& dst = result.files[r.task.fileId].records;
    std::move(r.value.begin(), r.value.end(), std::back_inserter(dst));
  }
  for (const auto& f : outcome.failures) {
    spdlog::warn("{} records [{}, {}) failed after {} attempt(s): {}", result.files[f.task.fileId].fileId,
                 f.task.recordBegin, f.task.recordEnd, f.task.attempt, f.error);
    result.files[f.task.fileId].failures.push_back({f.task.recordBegin, f.task.recordEnd, f.task.attempt, f.error});
  }
  for (auto& f : result.files) {
    std::stable_sort(f.records.begin(), f.records.end(),
                     [](const FeatureRecord& a, const FeatureRecord& b) { return a.recordIndex < b.recordIndex; });
    std::sort(f.failures.begin(), f.failures.end(),
              [](const FailedRecords& a, const FailedRecords& b) { return a.recordBegin < b.recordBegin; });
  }
  return result;
}

FileFeatures process_file(const AudioFileMeta& meta, const RecordPlan& plan, const AnalysisParams& params,
                          const ExecutorConfig& cfg, ChannelPolicy policy) {
  const PlannedFile file{meta, plan};
  auto result = process_corpus(std::span<const PlannedFile>(&file, 1), params, cfg, policy);
  return std::move(result.files.front());
}

}  // namespace pamforge
