#include "pamforge/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pamforge/error.hpp"

namespace pamforge {

WindowCoeffs make_window(WindowType type, std::size_t windowSize) {
  if (windowSize == 0) throw Error(ErrorCode::InvariantViolation, "window size must be >= 1");
  WindowCoeffs w;
  w.type = type;
  w.coeffs.assign(windowSize, 1.0);
  if (type == WindowType::Hamming && windowSize > 1) {
    const double denom = static_cast<double>(windowSize - 1);
    // Evaluate the first half and mirror it so w[n] == w[N-1-n] bit for bit.
    for (std::size_t n = 0; n < (windowSize + 1) / 2; ++n) {
      const double v = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / denom);
      w.coeffs[n] = v;
      w.coeffs[windowSize - 1 - n] = v;
    }
    if (windowSize % 2 == 1) w.coeffs[windowSize / 2] = 1.0;
  }
  for (double c : w.coeffs) w.sumSquares += c * c;
  return w;
}

FramePlan segment_frames(std::size_t recordLength, std::size_t windowSize, std::size_t windowOverlap) {
  if (windowSize == 0 || windowOverlap >= windowSize)
    throw Error(ErrorCode::InvariantViolation, "need 0 <= overlap < windowSize");
  if (recordLength < windowSize)
    throw Error(ErrorCode::RecordTooShort, "record of " + std::to_string(recordLength) +
                                               " samples is shorter than one " + std::to_string(windowSize) +
                                               "-sample window");
  FramePlan plan;
  plan.windowSize = windowSize;
  plan.hop = windowSize - windowOverlap;
  plan.count = (recordLength - windowSize) / plan.hop + 1;
  return plan;
}

namespace {

// Window, zero-pad, transform, and fold to a one-sided density into out.
// Shared by the single-frame and Welch paths so both produce identical bits.
template <typename Sink>
void frame_spectrum(std::span<const double> frame, const WindowCoeffs& window, const FftPlan& plan,
                    std::uint32_t sampleRateHz, std::vector<std::complex<double>>& scratch, Sink&& sink) {
  const std::size_t nfft = plan.size();
  scratch.assign(nfft, {0.0, 0.0});
  for (std::size_t n = 0; n < frame.size(); ++n) scratch[n] = {frame[n] * window.coeffs[n], 0.0};
  plan.transform(scratch);
  const double scale = 1.0 / (static_cast<double>(sampleRateHz) * window.sumSquares);
  const std::size_t bins = nfft / 2 + 1;
  for (std::size_t k = 0; k < bins; ++k) {
    const bool unpaired = k == 0 || (nfft % 2 == 0 && k == nfft / 2);
    const double c = unpaired ? 1.0 : 2.0;
    sink(k, c * std::norm(scratch[k]) * scale);
  }
}

void check_frame(std::span<const double> frame, const WindowCoeffs& window, std::size_t nfft) {
  if (frame.size() != window.coeffs.size())
    throw Error(ErrorCode::LengthMismatch, "frame length " + std::to_string(frame.size()) +
                                               " != window length " + std::to_string(window.coeffs.size()));
  if (nfft < frame.size()) throw Error(ErrorCode::LengthMismatch, "nfft is shorter than the frame");
}

}  // namespace

PsdVector periodogram(std::span<const double> frame, const WindowCoeffs& window, std::size_t nfft,
                      std::uint32_t sampleRateHz) {
  check_frame(frame, window, nfft);
  FftPlan plan(nfft);
  std::vector<std::complex<double>> scratch;
  PsdVector out;
  out.values.resize(nfft / 2 + 1);
  out.binWidthHz = static_cast<double>(sampleRateHz) / static_cast<double>(nfft);
  out.frameCount = 1;
  frame_spectrum(frame, window, plan, sampleRateHz, scratch, [&](std::size_t k, double p) { out.values[k] = p; });
  return out;
}

WelchEstimator::WelchEstimator(const AnalysisParams& params)
    : params_(params), window_(make_window(params.windowType, params.windowSize)), plan_(params.nfft) {
  if (params_.sampleRateHz == 0) throw Error(ErrorCode::InvariantViolation, "sample rate is not bound");
  params_.validate();
}

PsdVector WelchEstimator::periodogram(std::span<const double> frame) {
  check_frame(frame, window_, params_.nfft);
  PsdVector out;
  out.values.resize(params_.bin_count());
  out.binWidthHz = params_.bin_width_hz();
  out.frameCount = 1;
  frame_spectrum(frame, window_, plan_, params_.sampleRateHz, scratch_,
                 [&](std::size_t k, double p) { out.values[k] = p; });
  return out;
}

void WelchEstimator::accumulate_frame(std::span<const double> frame, std::span<double> acc) {
  frame_spectrum(frame, window_, plan_, params_.sampleRateHz, scratch_,
                 [&](std::size_t k, double p) { acc[k] += p; });
}

PsdVector WelchEstimator::estimate(std::span<const double> record) {
  const FramePlan frames = segment_frames(record.size(), params_.windowSize, params_.windowOverlap);
  PsdVector out;
  out.values.assign(params_.bin_count(), 0.0);
  out.binWidthHz = params_.bin_width_hz();
  out.frameCount = frames.count;
  for (std::size_t f = 0; f < frames.count; ++f)
    accumulate_frame(record.subspan(f * frames.hop, params_.windowSize), out.values);
  const double count = static_cast<double>(frames.count);
  for (double& v : out.values) v /= count;
  return out;
}

PsdVector welch_psd(std::span<const double> record, const AnalysisParams& params) {
  WelchEstimator estimator(params);
  return estimator.estimate(record);
}

double to_decibels(double linear, double reference, double floorDb) {
  if (linear < 0.0 || std::isnan(linear)) throw Error(ErrorCode::NegativeInput, "power must be >= 0");
  if (!(reference > 0.0)) throw Error(ErrorCode::NegativeInput, "reference must be > 0");
  if (linear == 0.0) return floorDb;
  return std::max(floorDb, 10.0 * std::log10(linear / (reference * reference)));
}

double level_db(double linear, double reference, double calibrationDb, double floorDb) {
  if (linear == 0.0) return floorDb;
  return std::max(floorDb, to_decibels(linear, reference, floorDb) + calibrationDb);
}

double total_power(const PsdVector& psd) {
  double sum = 0.0;
  for (double p : psd.values) sum += p * psd.binWidthHz;
  return sum;
}

double spl(const PsdVector& psd, double dbReference, double calibrationDb) {
  return level_db(total_power(psd), dbReference, calibrationDb);
}

TolBandTable tol_band_table(std::uint32_t sampleRateHz, const Rational& tolWindowSec) {
  if (tolWindowSec.num() < tolWindowSec.den())
    throw Error(ErrorCode::TolWindowTooShort, "TOL window " + tolWindowSec.to_string() + " s is below 1 s");
  if (sampleRateHz == 0) throw Error(ErrorCode::InvariantViolation, "sample rate must be positive");
  const double minCenter = std::max(1.0 / tolWindowSec.to_double(), 1.0);
  const double nyquist = sampleRateHz / 2.0;
  TolBandTable table;
  for (int n = 0;; ++n) {
    TolBand b;
    b.index = n;
    b.centerHz = std::pow(10.0, n / 10.0);
    b.lowHz = std::pow(10.0, (n - 0.5) / 10.0);
    b.highHz = std::pow(10.0, (n + 0.5) / 10.0);
    if (b.highHz > nyquist) break;
    if (b.centerHz >= minCenter) table.bands.push_back(b);
  }
  return table;
}

BinRange band_bins(const TolBand& band, double binWidthHz, std::size_t binCount) {
  auto first_at_or_above = [&](double hz) {
    auto k = static_cast<std::size_t>(std::max(0.0, std::floor(hz / binWidthHz) - 1.0));
    while (k < binCount && static_cast<double>(k) * binWidthHz < hz) ++k;
    return std::min(k, binCount);
  };
  BinRange r;
  r.first = first_at_or_above(band.lowHz);
  r.last = std::max(r.first, first_at_or_above(band.highHz));
  return r;
}

TolVector tol(std::span<const PsdVector> psdSequence, const TolBandTable& table, double dbReference,
              double calibrationDb) {
  if (psdSequence.empty()) throw Error(ErrorCode::LengthMismatch, "TOL needs at least one sub-record PSD");
  const double bw = psdSequence.front().binWidthHz;
  const std::size_t bins = psdSequence.front().values.size();
  for (const auto& psd : psdSequence)
    if (psd.binWidthHz != bw || psd.values.size() != bins)
      throw Error(ErrorCode::LengthMismatch, "sub-record PSDs disagree on bin layout");

  TolVector out;
  const double count = static_cast<double>(psdSequence.size());
  for (const auto& band : table.bands) {
    const BinRange r = band_bins(band, bw, bins);
    if (r.first == r.last) {
      out.emptyBands.push_back(band);
      continue;
    }
    double acc = 0.0;
    for (const auto& psd : psdSequence) {
      double sum = 0.0;
      for (std::size_t k = r.first; k < r.last; ++k) sum += psd.values[k] * bw;
      acc += sum;
    }
    const double power = acc / count;
    out.bands.push_back(band);
    out.bandPowers.push_back(power);
    out.values.push_back(level_db(power, dbReference, calibrationDb));
  }
  return out;
}

}  // namespace pamforge
