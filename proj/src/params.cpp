#include <cmath>
#include <cstdio>

#include "pamforge/dsp.hpp"
#include "pamforge/error.hpp"

namespace pamforge {

std::string to_string(WindowType type) { return type == WindowType::Hamming ? "hamming" : "rectangular"; }

void AnalysisParams::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvariantViolation, what); };
  if (nfft == 0) fail("nfft must be positive");
  if (windowSize == 0) fail("windowSize must be positive");
  if (windowOverlap >= windowSize)
    fail("windowOverlap (" + std::to_string(windowOverlap) + ") must be < windowSize (" +
         std::to_string(windowSize) + ")");
  if (windowSize > nfft)
    fail("windowSize (" + std::to_string(windowSize) + ") must be <= nfft (" + std::to_string(nfft) + ")");
  if (!recordSizeSec.positive()) fail("recordSizeInSec must be positive");
  if (tolWindowSec.num() < tolWindowSec.den())
    throw Error(ErrorCode::TolWindowTooShort, "TOL window " + tolWindowSec.to_string() + " s is below 1 s");
  if (recordSizeSec.to_double() < tolWindowSec.to_double())
    fail("recordSizeInSec must cover at least one TOL window");
  if (!(dbReference > 0.0) || !std::isfinite(dbReference)) fail("dbReference must be positive");
  if (!std::isfinite(calibrationDb)) fail("calibrationDb must be finite");
}

std::size_t AnalysisParams::record_samples() const {
  const auto n = recordSizeSec.times_integer(sampleRateHz);
  if (!n || *n <= 0)
    throw Error(ErrorCode::NonIntegerRecordLength,
                recordSizeSec.to_string() + " s x " + std::to_string(sampleRateHz) + " Hz is not integral");
  return static_cast<std::size_t>(*n);
}

std::size_t AnalysisParams::tol_window_samples() const {
  const auto n = tolWindowSec.times_integer(sampleRateHz);
  if (!n || *n <= 0)
    throw Error(ErrorCode::NonIntegerRecordLength,
                "TOL window " + tolWindowSec.to_string() + " s is not a whole number of samples");
  return static_cast<std::size_t>(*n);
}

void AnalysisParams::validate_bound() const {
  validate();
  if (sampleRateHz == 0) throw Error(ErrorCode::InvariantViolation, "sample rate is not bound");
  const std::size_t rec = record_samples();
  const std::size_t sub = tol_window_samples();
  if (windowSize > rec)
    throw Error(ErrorCode::InvariantViolation, "windowSize exceeds the record length");
  if (windowSize > sub) throw Error(ErrorCode::InvariantViolation, "windowSize exceeds the TOL window");
}

AnalysisParams AnalysisParams::bound_to(std::uint32_t rate) const {
  AnalysisParams p = *this;
  p.sampleRateHz = rate;
  p.validate_bound();
  return p;
}

std::string AnalysisParams::canonical() const {
  char cal[64];
  char ref[64];
  std::snprintf(cal, sizeof cal, "%.17g", calibrationDb);
  std::snprintf(ref, sizeof ref, "%.17g", dbReference);
  return "nfft=" + std::to_string(nfft) + ";windowSize=" + std::to_string(windowSize) +
         ";windowOverlap=" + std::to_string(windowOverlap) + ";recordSizeInSec=" + recordSizeSec.to_string() +
         ";windowType=" + to_string(windowType) + ";sampleRateHz=" + std::to_string(sampleRateHz) +
         ";calibrationDb=" + cal + ";dbReference=" + ref + ";tolWindowSec=" + tolWindowSec.to_string();
}

std::string AnalysisParams::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pamforge
