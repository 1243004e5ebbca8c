#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pamforge/rational.hpp"
#include "pamforge/timestamp.hpp"

namespace pamforge {

// Facts decoded from a RIFF/WAVE header. Immutable once built; safe to share
// across workers.
struct AudioFileMeta {
  std::string path;
  std::uint32_t sampleRateHz = 0;
  std::uint16_t bitDepth = 0;
  std::uint16_t channels = 0;
  std::uint64_t totalSamples = 0;  // per channel
  UtcTime startTime{};
  std::uint64_t byteOffsetToData = 0;

  std::uint32_t bytes_per_sample() const noexcept { return bitDepth / 8u; }
  std::uint32_t block_align() const noexcept { return bytes_per_sample() * channels; }
  std::uint64_t data_bytes() const noexcept { return totalSamples * block_align(); }
};

struct RecordOffset {
  std::uint64_t recordIndex = 0;
  std::uint64_t firstSampleIndex = 0;
};

struct RecordPlan {
  Rational recordSizeSec;
  std::uint64_t recordSizeSamples = 0;
  std::uint64_t recordCount = 0;
  std::vector<RecordOffset> offsets;
  std::uint64_t droppedTailSamples = 0;
};

struct SampleBuffer {
  std::vector<double> samples;
  std::uint64_t recordIndex = 0;
  UtcTime timestamp{};
};

enum class ChannelPolicy {
  FirstChannel,        // decode channel 0, ignore the rest
  RejectMultichannel,  // refuse files with more than one channel
};

// Walks the chunk list of a RIFF/WAVE stream without reading PCM payload.
// streamSize is the total number of bytes available in the stream.
AudioFileMeta parse_wav_header(std::istream& in, std::uint64_t streamSize);
AudioFileMeta parse_wav_header(std::span<const std::uint8_t> rawBytes);
AudioFileMeta read_wav_meta(const std::filesystem::path& path);

// Start times: parsed from the filename when the pattern matches; otherwise
// files without a match are laid end-to-end from the epoch in the given order.
void assign_start_times(std::span<AudioFileMeta> files, const TimestampPattern& pattern);

RecordPlan plan_records(const AudioFileMeta& meta, const Rational& recordSizeSec);

// Each reader owns its own file handle, so one reader per task gives
// independent read state for concurrent access to the same file.
class RecordReader {
 public:
  RecordReader(const AudioFileMeta& meta, ChannelPolicy policy = ChannelPolicy::FirstChannel);

  SampleBuffer read(const RecordPlan& plan, std::uint64_t recordIndex);

 private:
  const AudioFileMeta* meta_;
  std::ifstream in_;
  std::vector<std::uint8_t> raw_;
};

SampleBuffer read_record(const AudioFileMeta& meta, const RecordPlan& plan, std::uint64_t recordIndex,
                         ChannelPolicy policy = ChannelPolicy::FirstChannel);

// Integer PCM -> [-1, 1) by 2^(bitDepth-1).
void decode_pcm(std::span<const std::uint8_t> raw, std::uint16_t bitDepth, std::uint16_t channels,
                std::span<double> out);

// --- Synthetic corpora -----------------------------------------------------

struct Silence {};
struct Sine {
  double freqHz = 1000.0;
  double amplitude = 0.5;
};
struct WhiteNoise {
  double variance = 0.01;
  std::uint64_t seed = 42;
};
using SignalSpec = std::variant<Silence, Sine, WhiteNoise>;

struct SynthSpec {
  Rational durationSec{1};
  std::uint32_t sampleRateHz = 32768;
  SignalSpec signal = Silence{};
};

std::uint64_t synthetic_sample_count(const SynthSpec& spec);
std::uint64_t synthetic_file_bytes(const SynthSpec& spec);

// Writes a mono 16-bit PCM WAV. Deterministic for a fixed spec.
void generate_synthetic_wav(const SynthSpec& spec, const std::filesystem::path& path);

// The exact quantized samples the generator writes, without touching disk.
std::vector<std::int16_t> synthesize_pcm16(const SynthSpec& spec);

}  // namespace pamforge
