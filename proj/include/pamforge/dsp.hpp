#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pamforge/fft.hpp"
#include "pamforge/rational.hpp"

namespace pamforge {

inline constexpr double kDefaultDbFloor = -1000.0;

enum class WindowType { Hamming, Rectangular };

std::string to_string(WindowType type);

// The FFT-related parameter set plus engine-level choices. sampleRateHz is
// bound per file from its header; 0 means "not bound yet".
struct AnalysisParams {
  std::size_t nfft = 256;
  std::size_t windowSize = 256;
  std::size_t windowOverlap = 128;
  Rational recordSizeSec{1};
  WindowType windowType = WindowType::Hamming;
  std::uint32_t sampleRateHz = 0;
  double calibrationDb = 0.0;
  double dbReference = 1.0;
  Rational tolWindowSec{1};

  // Checks everything that does not depend on the sample rate.
  void validate() const;
  // Full check once sampleRateHz is known.
  void validate_bound() const;
  AnalysisParams bound_to(std::uint32_t rate) const;

  std::size_t record_samples() const;
  std::size_t tol_window_samples() const;
  std::size_t bin_count() const noexcept { return nfft / 2 + 1; }
  double bin_width_hz() const noexcept { return static_cast<double>(sampleRateHz) / static_cast<double>(nfft); }

  // Stable canonical text and its 64-bit FNV-1a digest in hex.
  std::string canonical() const;
  std::string fingerprint() const;

  friend bool operator==(const AnalysisParams&, const AnalysisParams&) = default;
};

struct WindowCoeffs {
  WindowType type = WindowType::Rectangular;
  std::vector<double> coeffs;
  double sumSquares = 0.0;
};

// Symmetric Hamming w[n] = 0.54 - 0.46 cos(2 pi n / (N - 1)); N = 1 gives [1].
WindowCoeffs make_window(WindowType type, std::size_t windowSize);

struct FramePlan {
  std::size_t count = 0;
  std::size_t hop = 0;
  std::size_t windowSize = 0;
};

FramePlan segment_frames(std::size_t recordLength, std::size_t windowSize, std::size_t windowOverlap);

// One-sided density spectrum, pressure^2 / Hz.
struct PsdVector {
  std::vector<double> values;
  double binWidthHz = 0.0;
  std::size_t frameCount = 0;
};

PsdVector periodogram(std::span<const double> frame, const WindowCoeffs& window, std::size_t nfft,
                      std::uint32_t sampleRateHz);

// Reusable Welch estimator: owns the window, FFT plan and scratch for one
// parameter set. Not thread-safe; use one per worker.
class WelchEstimator {
 public:
  explicit WelchEstimator(const AnalysisParams& params);

  const AnalysisParams& params() const noexcept { return params_; }
  const WindowCoeffs& window() const noexcept { return window_; }

  // Periodogram of a single frame of windowSize samples.
  PsdVector periodogram(std::span<const double> frame);
  // Mean of the per-frame periodograms, accumulated in frame order.
  PsdVector estimate(std::span<const double> record);

 private:
  void accumulate_frame(std::span<const double> frame, std::span<double> acc);

  AnalysisParams params_;
  WindowCoeffs window_;
  FftPlan plan_;
  std::vector<std::complex<double>> scratch_;
};

PsdVector welch_psd(std::span<const double> record, const AnalysisParams& params);

double to_decibels(double linear, double reference, double floorDb = kDefaultDbFloor);
// to_decibels plus an additive calibration; zero power stays at the floor.
double level_db(double linear, double reference, double calibrationDb, double floorDb = kDefaultDbFloor);

// Sum_k P[k] * binWidthHz, DC through Nyquist, sequential over bins.
double total_power(const PsdVector& psd);
double spl(const PsdVector& psd, double dbReference, double calibrationDb);

struct TolBand {
  int index = 0;
  double centerHz = 0.0;
  double lowHz = 0.0;
  double highHz = 0.0;
};

struct TolBandTable {
  std::vector<TolBand> bands;
};

// Base-10 third-octave bands, centre 10^(n/10).
TolBandTable tol_band_table(std::uint32_t sampleRateHz, const Rational& tolWindowSec);

struct TolVector {
  std::vector<TolBand> bands;       // bands holding at least one bin
  std::vector<double> bandPowers;   // linear, pressure^2
  std::vector<double> values;       // dB re dbReference^2, calibrated
  std::vector<TolBand> emptyBands;  // bands no bin fell into; excluded above
};

struct BinRange {
  std::size_t first = 0;
  std::size_t last = 0;  // exclusive
};

// Bins f_k = k * binWidthHz with lowHz <= f_k < highHz.
BinRange band_bins(const TolBand& band, double binWidthHz, std::size_t binCount);

TolVector tol(std::span<const PsdVector> psdSequence, const TolBandTable& table, double dbReference,
              double calibrationDb);

}  // namespace pamforge
