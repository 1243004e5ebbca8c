#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "pamforge/audio_ingest.hpp"
#include "pamforge/error.hpp"

namespace pamforge {

namespace {

constexpr std::size_t kChunkSamples = 1 << 16;

// Sequential sample source; noise keeps its RNG state across chunks so the
// stream is identical however it is chunked.
class SignalSource {
 public:
  SignalSource(const SignalSpec& signal, std::uint32_t rate) : signal_(signal), rate_(rate) {
    if (const auto* noise = std::get_if<WhiteNoise>(&signal_)) {
      if (noise->variance < 0.0) throw Error(ErrorCode::InvariantViolation, "negative noise variance");
      rng_.seed(noise->seed);
      sigma_ = std::sqrt(noise->variance);
    }
  }

  double next() {
    const std::uint64_t n = index_++;
    if (const auto* sine = std::get_if<Sine>(&signal_)) {
      // Reduce the phase modulo one period before scaling to keep it exact.
      const double cycles = std::fmod(sine->freqHz * static_cast<double>(n), static_cast<double>(rate_));
      return sine->amplitude * std::sin(2.0 * std::numbers::pi * cycles / rate_);
    }
    if (std::holds_alternative<WhiteNoise>(signal_)) return sigma_ * gaussian();
    return 0.0;
  }

 private:
  // Box-Muller on 53-bit uniforms; std::normal_distribution is not portable
  // across standard libraries.
  double gaussian() {
    if (hasSpare_) {
      hasSpare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    hasSpare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  SignalSpec signal_;
  std::uint32_t rate_;
  std::uint64_t index_ = 0;
  std::mt19937_64 rng_;
  double sigma_ = 0.0;
  double spare_ = 0.0;
  bool hasSpare_ = false;
};

std::int16_t quantize16(double x) {
  const double q = std::nearbyint(x * 32768.0);
  return static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0));
}

void validate(const SynthSpec& spec) {
  if (spec.sampleRateHz == 0) throw Error(ErrorCode::InvariantViolation, "sample rate must be positive");
  if (const auto* sine = std::get_if<Sine>(&spec.signal); sine && std::abs(sine->amplitude) > 1.0)
    throw Error(ErrorCode::ClippingRequested, "sine amplitude " + std::to_string(sine->amplitude) + " > 1");
  if (!spec.durationSec.times_integer(spec.sampleRateHz))
    throw Error(ErrorCode::NonIntegerRecordLength, "duration x rate is not a whole number of samples");
}

void put16(std::ofstream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  out.write(b, 2);
}
void put32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF), static_cast<char>(v >> 24)};
  out.write(b, 4);
}

}  // namespace

std::uint64_t synthetic_sample_count(const SynthSpec& spec) {
  const auto n = spec.durationSec.times_integer(spec.sampleRateHz);
  if (!n || *n < 0) throw Error(ErrorCode::NonIntegerRecordLength, "duration x rate is not a whole number of samples");
  return static_cast<std::uint64_t>(*n);
}

std::uint64_t synthetic_file_bytes(const SynthSpec& spec) { return 44 + 2 * synthetic_sample_count(spec); }

std::vector<std::int16_t> synthesize_pcm16(const SynthSpec& spec) {
  validate(spec);
  const auto count = synthetic_sample_count(spec);
  std::vector<std::int16_t> out(count);
  SignalSource source(spec.signal, spec.sampleRateHz);
  for (auto& s : out) s = quantize16(source.next());
  return out;
}

void generate_synthetic_wav(const SynthSpec& spec, const std::filesystem::path& path) {
  validate(spec);
  const std::uint64_t count = synthetic_sample_count(spec);
  const std::uint64_t dataBytes = 2 * count;
  if (dataBytes + 36 > 0xFFFFFFFFull) throw Error(ErrorCode::InvariantViolation, "WAV would exceed 4 GiB");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
  out.write("RIFF", 4);
  put32(out, static_cast<std::uint32_t>(36 + dataBytes));
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put32(out, 16);
  put16(out, 1);  // PCM
  put16(out, 1);  // mono
  put32(out, spec.sampleRateHz);
  put32(out, spec.sampleRateHz * 2);
  put16(out, 2);
  put16(out, 16);
  out.write("data", 4);
  put32(out, static_cast<std::uint32_t>(dataBytes));

  SignalSource source(spec.signal, spec.sampleRateHz);
  std::vector<char> chunk;
  chunk.reserve(2 * kChunkSamples);
  for (std::uint64_t done = 0; done < count;) {
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(kChunkSamples, count - done));
    chunk.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = static_cast<std::uint16_t>(quantize16(source.next()));
      chunk.push_back(static_cast<char>(v & 0xFF));
      chunk.push_back(static_cast<char>(v >> 8));
    }
    out.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    done += n;
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

}  // namespace pamforge
