#include "pamforge/fft.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "pamforge/error.hpp"

namespace pamforge {

namespace {

std::complex<double> unit_root(std::size_t k, std::size_t n) {
  const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw Error(ErrorCode::InvariantViolation, "FFT length must be positive");
  if (std::has_single_bit(n)) {
    kind_ = Kind::PowerOfTwo;
    twiddles_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) twiddles_[k] = unit_root(k, n);
    const int bits = std::countr_zero(n);
    bitReverse_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      bitReverse_[i] = r;
    }
  } else if (n < 64) {
    kind_ = Kind::Direct;
    twiddles_.resize(n);
    for (std::size_t k = 0; k < n; ++k) twiddles_[k] = unit_root(k, n);
  } else {
    kind_ = Kind::Bluestein;
    const std::size_t m = std::bit_ceil(2 * n - 1);
    chirp_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      // exp(-i pi k^2 / n), with k^2 reduced mod 2n to keep the angle small.
      const std::size_t k2 = static_cast<std::size_t>((static_cast<unsigned __int128>(k) * k) % (2 * n));
      const double angle = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
      chirp_[k] = {std::cos(angle), std::sin(angle)};
    }
    inner_.emplace_back(m);
    chirpSpectrum_.assign(m, {0.0, 0.0});
    chirpSpectrum_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n; ++k) chirpSpectrum_[k] = chirpSpectrum_[m - k] = std::conj(chirp_[k]);
    inner_.front().transform(chirpSpectrum_);
  }
}

void FftPlan::transform(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw Error(ErrorCode::LengthMismatch, "FFT input length does not match the plan");
  switch (kind_) {
    case Kind::PowerOfTwo: radix2(data); break;
    case Kind::Direct: direct(data); break;
    case Kind::Bluestein: bluestein(data); break;
  }
}

void FftPlan::radix2(std::span<std::complex<double>> data) const {
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j = bitReverse_[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::complex<double> t = twiddles_[k * stride] * data[start + k + half];
        const std::complex<double> u = data[start + k];
        data[start + k] = u + t;
        data[start + k + half] = u - t;
      }
    }
  }
}

void FftPlan::direct(std::span<std::complex<double>> data) const {
  std::vector<std::complex<double>> out(n_);
  for (std::size_t k = 0; k < n_; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < n_; ++j) acc += data[j] * twiddles_[(k * j) % n_];
    out[k] = acc;
  }
  std::copy(out.begin(), out.end(), data.begin());
}

void FftPlan::bluestein(std::span<std::complex<double>> data) const {
  const FftPlan& inner = inner_.front();
  const std::size_t m = inner.size();
  std::vector<std::complex<double>> work(m, {0.0, 0.0});
  for (std::size_t k = 0; k < n_; ++k) work[k] = data[k] * chirp_[k];
  inner.transform(work);
  for (std::size_t k = 0; k < m; ++k) work[k] = std::conj(work[k] * chirpSpectrum_[k]);
  // Inverse transform via conjugation: ifft(x) = conj(fft(conj(x))) / m.
  inner.transform(work);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n_; ++k) data[k] = std::conj(work[k]) * scale * chirp_[k];
}

}  // namespace pamforge
