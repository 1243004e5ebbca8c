#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "pamforge/audio_ingest.hpp"
#include "pamforge/dsp.hpp"
#include "pamforge/executor.hpp"

namespace pamforge {

// Built-in parameter sets: "set1" (256/128/256, 1 s) and "set2" (1024/0/1024, 30 s).
std::optional<AnalysisParams> preset(std::string_view name);

// A preset name or a path to a JSON file with the fields nfft, windowSize,
// windowOverlap, recordSizeInSec and optionally windowType, calibrationDb,
// dbReference, tolWindowSec. Throws SchemaError or InvariantViolation.
AnalysisParams load_params(std::string_view pathOrPreset);
AnalysisParams params_from_json(std::string_view text);
std::string params_to_json(const AnalysisParams& params);

std::string executor_to_json(const ExecutorConfig& cfg);
ExecutorConfig executor_from_json(std::string_view text);

enum class Command { Process, Bench, Validate, Synth };

struct RunConfig {
  Command command = Command::Process;
  std::filesystem::path inputDir;
  std::filesystem::path outputDir;
  AnalysisParams params;
  ExecutorConfig executor;
  ChannelPolicy channelPolicy = ChannelPolicy::FirstChannel;
  TimestampPattern timestampPattern;
  std::optional<std::uint32_t> expectedSampleRateHz;
  std::string logLevel = "info";
};

// Sets the default logger to stderr at the level named by PAMFORGE_LOG
// (trace, debug, info, warn, error, critical, off), else fallbackLevel.
void init_logging(std::string_view fallbackLevel = "info");

}  // namespace pamforge
