#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "../oracle/oracle.hpp"
#include "pamforge/dsp.hpp"
#include "pamforge/error.hpp"
#include "test_util.hpp"

using namespace pamforge;
using pamforge::testing::random_signal;

namespace {

AnalysisParams bound(std::size_t nfft, std::size_t win, std::size_t overlap, std::uint32_t fs,
                     WindowType type = WindowType::Hamming) {
  AnalysisParams p;
  p.nfft = nfft;
  p.windowSize = win;
  p.windowOverlap = overlap;
  p.windowType = type;
  return p.bound_to(fs);
}

double rel_rmse(const std::vector<double>& got, const std::vector<double>& want) {
  REQUIRE(got.size() == want.size());
  double se = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    se += (got[i] - want[i]) * (got[i] - want[i]);
    ref += want[i] * want[i];
  }
  return std::sqrt(se / ref);
}

}  // namespace

TEST_CASE("window coefficients") {
  const auto w = make_window(WindowType::Hamming, 5);
  REQUIRE(w.coeffs.size() == 5);
  CHECK(w.coeffs[0] == doctest::Approx(0.08).epsilon(1e-15));
  CHECK(w.coeffs[1] == doctest::Approx(0.54).epsilon(1e-15));
  CHECK(w.coeffs[2] == 1.0);
  CHECK(w.coeffs[4] == w.coeffs[0]);
  CHECK(w.coeffs[3] == w.coeffs[1]);
  CHECK(make_window(WindowType::Hamming, 1).coeffs == std::vector<double>{1.0});
  const auto r = make_window(WindowType::Rectangular, 8);
  CHECK(r.sumSquares == 8.0);
  const auto h = make_window(WindowType::Hamming, 256);
  for (std::size_t n = 0; n < 256; ++n) CHECK(std::abs(h.coeffs[n] - h.coeffs[255 - n]) < 1e-15);
}

TEST_CASE("frame segmentation") {
  CHECK(segment_frames(32768, 256, 128).count == 255);
  CHECK(segment_frames(30 * 32768, 1024, 0).count == 960);
  CHECK(segment_frames(256, 256, 128).count == 1);
  CHECK(segment_frames(383, 256, 128).count == 1);
  CHECK(segment_frames(384, 256, 128).count == 2);
  CHECK_THROWS_AS(segment_frames(255, 256, 128), Error);
  CHECK_THROWS_AS(segment_frames(1024, 256, 256), Error);
}

TEST_CASE("periodogram of constants and tones") {
  const auto rect = make_window(WindowType::Rectangular, 8);
  std::vector<double> ones(8, 1.0);
  const auto p = periodogram(ones, rect, 8, 8);
  REQUIRE(p.values.size() == 5);
  CHECK(p.values[0] == doctest::Approx(1.0));
  for (std::size_t k = 1; k < 5; ++k) CHECK(std::abs(p.values[k]) < 1e-30);

  // Bin-centred sine: all power in bin m, density A^2/2 / binWidth.
  std::vector<double> s(64);
  for (std::size_t n = 0; n < 64; ++n) s[n] = std::sin(2 * std::numbers::pi * 8 * n / 64.0);
  const auto ps = periodogram(s, make_window(WindowType::Rectangular, 64), 64, 64);
  CHECK(ps.values[8] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(total_power(ps) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(periodogram(std::vector<double>(7, 0.0), rect, 8, 8), Error);
}

TEST_CASE("periodogram matches the brute-force oracle") {
  for (auto type : {WindowType::Hamming, WindowType::Rectangular}) {
    for (std::size_t nfft : {8u, 9u, 256u, 300u}) {
      const std::size_t win = nfft == 300 ? 256 : nfft;
      const auto frame = random_signal(win, nfft * 3 + static_cast<int>(type));
      const auto got = periodogram(frame, make_window(type, win), nfft, 1000);
      const auto want = oracle::fold(oracle::two_sided_density(frame, type, nfft, 1000.0));
      CHECK_MESSAGE(rel_rmse(got.values, want) < 1e-12, "nfft=" << nfft);
    }
  }
}

TEST_CASE("Parseval holds for the one-sided density") {
  for (auto type : {WindowType::Hamming, WindowType::Rectangular}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto x = random_signal(256, 1000 + trial);
      const auto w = make_window(type, 256);
      const auto p = periodogram(x, w, 256, 32768);
      double lhs = 0.0;
      for (std::size_t n = 0; n < 256; ++n) lhs += (x[n] * w.coeffs[n]) * (x[n] * w.coeffs[n]);
      lhs /= 32768.0 * w.sumSquares;
      const double rhs = std::accumulate(p.values.begin(), p.values.end(), 0.0) / 256.0;
      CHECK(std::abs(lhs - rhs) / lhs < 1e-12);
    }
  }
}

TEST_CASE("periodogram is quadratic in scale") {
  const auto x = random_signal(256, 77);
  std::vector<double> y(x);
  for (auto& v : y) v *= 3.0;
  const auto w = make_window(WindowType::Hamming, 256);
  const auto px = periodogram(x, w, 256, 8000);
  const auto py = periodogram(y, w, 256, 8000);
  for (std::size_t k = 0; k < px.values.size(); ++k)
    CHECK(py.values[k] == doctest::Approx(9.0 * px.values[k]).epsilon(1e-12));
}

TEST_CASE("Welch averaging") {
  const auto p = bound(256, 256, 128, 32768);
  const auto x = random_signal(32768, 5, 0.3);
  WelchEstimator est(p);
  const auto got = est.estimate(x);
  CHECK(got.frameCount == 255);
  CHECK(rel_rmse(got.values, oracle::welch(x, p)) < 1e-12);

  // Sequential mean of the single-frame path is bit-identical.
  std::vector<double> acc(p.bin_count(), 0.0);
  for (std::size_t f = 0; f < 255; ++f) {
    const auto one = est.periodogram(std::span<const double>(x).subspan(f * 128, 256));
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += one.values[k];
  }
  for (auto& v : acc) v /= 255.0;
  CHECK(acc == got.values);
  CHECK(welch_psd(x, p).values == got.values);

  // White noise of variance s^2 has density 2 s^2 / fs away from the edges.
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<double> noise(30 * 32768);
  for (auto& v : noise) v = g(rng);
  const auto p2 = bound(1024, 1024, 0, 32768);
  const auto psd = welch_psd(noise, p2);
  const double expected = 2.0 * 0.01 / 32768.0;
  double mean = 0.0;
  for (std::size_t k = 1; k + 1 < psd.values.size(); ++k) mean += psd.values[k];
  mean /= static_cast<double>(psd.values.size() - 2);
  CHECK(mean == doctest::Approx(expected).epsilon(0.10));
  std::size_t within = 0;
  for (std::size_t k = 1; k + 1 < psd.values.size(); ++k)
    within += std::abs(psd.values[k] / expected - 1.0) <= 0.25;
  CHECK(within > 0.95 * (psd.values.size() - 2));
}

TEST_CASE("decibel conversion") {
  CHECK(to_decibels(1.0, 1.0) == 0.0);
  CHECK(to_decibels(100.0, 1.0) == doctest::Approx(20.0));
  CHECK(to_decibels(0.0, 1.0) == kDefaultDbFloor);
  CHECK(to_decibels(1e-300, 1.0) == kDefaultDbFloor);
  CHECK(to_decibels(4.0, 2.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(to_decibels(-1.0, 1.0), Error);
  CHECK(level_db(1.0, 1.0, 3.5) == doctest::Approx(3.5));
  CHECK(level_db(0.0, 1.0, 3.5) == kDefaultDbFloor);
  PsdVector flat{std::vector<double>(5, 0.5), 2.0, 1};
  CHECK(total_power(flat) == 5.0);
  CHECK(spl(flat, 1.0, 0.0) == doctest::Approx(10.0 * std::log10(5.0)));
}

TEST_CASE("third-octave band table") {
  const auto table = tol_band_table(32768, Rational(1));
  REQUIRE(!table.bands.empty());
  CHECK(table.bands.front().index == 0);
  CHECK(table.bands.back().index == 41);
  CHECK(table.bands.back().centerHz == doctest::Approx(12589.254117941673));
  for (const auto& b : table.bands) CHECK(b.highHz <= 16384.0);
  for (std::size_t i = 1; i < table.bands.size(); ++i) {
    CHECK(table.bands[i].index == table.bands[i - 1].index + 1);
    CHECK(table.bands[i].lowHz == table.bands[i - 1].highHz);
  }
  const auto& b30 = table.bands[30];
  CHECK(b30.index == 30);
  CHECK(b30.centerHz == doctest::Approx(1000.0));
  CHECK(b30.lowHz == doctest::Approx(891.2509381337459).epsilon(1e-14));
  CHECK(b30.highHz == doctest::Approx(1122.018454301963).epsilon(1e-14));
  CHECK_THROWS_AS(tol_band_table(32768, Rational(1, 2)), Error);
  CHECK(tol_band_table(32768, Rational(10)).bands.front().index == 0);
}

TEST_CASE("band bin assignment is half-open") {
  TolBand b{0, 10.0, 8.0, 12.0};
  const auto r = band_bins(b, 2.0, 100);
  CHECK(r.first == 4);
  CHECK(r.last == 6);
  const auto none = band_bins(TolBand{0, 1.0, 0.9, 1.1}, 2.0, 100);
  CHECK(none.first == none.last);
}

TEST_CASE("populated bands for the standard presets at 32768 Hz") {
  const auto table = tol_band_table(32768, Rational(1));
  auto indices = [&](std::size_t nfft) {
    PsdVector psd{std::vector<double>(nfft / 2 + 1, 1.0), 32768.0 / nfft, 1};
    const auto t = tol(std::span<const PsdVector>(&psd, 1), table, 1.0, 0.0);
    std::vector<int> out;
    for (const auto& b : t.bands) out.push_back(b.index);
    CHECK(t.bands.size() + t.emptyBands.size() == table.bands.size());
    return out;
  };
  std::vector<int> set1 = {21, 24};
  for (int n = 26; n <= 41; ++n) set1.push_back(n);
  std::vector<int> set2 = {15, 18};
  for (int n = 20; n <= 41; ++n) set2.push_back(n);
  CHECK(indices(256) == set1);
  CHECK(indices(1024) == set2);
}

TEST_CASE("TOL of a flat spectrum grows by a tenth of a decade per band") {
  const std::size_t nfft = 1 << 20;
  PsdVector psd{std::vector<double>(nfft / 2 + 1, 1e-3), 1024.0 / nfft, 1};
  const auto t = tol(std::span<const PsdVector>(&psd, 1), tol_band_table(1024, Rational(1)), 1.0, 0.0);
  REQUIRE(t.bands.size() > 5);
  for (std::size_t i = 1; i < t.bandPowers.size(); ++i) {
    const double ratio = t.bandPowers[i] / t.bandPowers[i - 1];
    CHECK(std::abs(ratio / std::pow(10.0, 0.1) - 1.0) < 0.02);
  }
}

TEST_CASE("TOL averages sub-record PSDs") {
  PsdVector a{std::vector<double>(129, 1.0), 128.0, 1};
  PsdVector b{std::vector<double>(129, 3.0), 128.0, 1};
  const std::vector<PsdVector> seq = {a, b};
  const auto table = tol_band_table(32768, Rational(1));
  const auto both = tol(seq, table, 1.0, 0.0);
  PsdVector mid{std::vector<double>(129, 2.0), 128.0, 1};
  const auto one = tol(std::span<const PsdVector>(&mid, 1), table, 1.0, 0.0);
  CHECK(both.bandPowers == one.bandPowers);
  CHECK_THROWS_AS(tol(std::span<const PsdVector>(), table, 1.0, 0.0), Error);
}

TEST_CASE("1 kHz sine lands in band 30") {
  AnalysisParams p = bound(1024, 1024, 0, 32768);
  std::vector<double> x(32768);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = 0.5 * std::sin(2 * std::numbers::pi * 1000.0 * n / 32768.0);
  const auto psd = welch_psd(x, p);
  const auto t = tol(std::span<const PsdVector>(&psd, 1), tol_band_table(32768, Rational(1)), 1.0, 0.0);
  const auto peak = std::max_element(t.values.begin(), t.values.end()) - t.values.begin();
  CHECK(t.bands[peak].index == 30);
  for (std::size_t i = 0; i < t.values.size(); ++i)
    if (static_cast<std::ptrdiff_t>(i) != peak) CHECK(t.values[peak] - t.values[i] >= 30.0);
}
