#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pamforge {

// Forward complex DFT of a fixed length, X[k] = sum_n x[n] exp(-2 pi i k n / N).
//
// Powers of two use an iterative radix-2 transform with exactly evaluated
// twiddles. Other lengths use a direct DFT below 64 points and Bluestein's
// chirp-z reformulation above. A plan is immutable after construction and may
// be shared between threads; transform() allocates its own scratch when the
// length needs any.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  void transform(std::span<std::complex<double>> data) const;

 private:
  enum class Kind { PowerOfTwo, Direct, Bluestein };

  void radix2(std::span<std::complex<double>> data) const;
  void direct(std::span<std::complex<double>> data) const;
  void bluestein(std::span<std::complex<double>> data) const;

  std::size_t n_;
  Kind kind_;
  std::vector<std::complex<double>> twiddles_;  // exp(-2 pi i k / n), k < n (or n/2 for radix-2)
  std::vector<std::size_t> bitReverse_;
  // Bluestein state.
  std::vector<std::complex<double>> chirp_;
  std::vector<std::complex<double>> chirpSpectrum_;
  std::vector<FftPlan> inner_;  // at most one, power-of-two length
};

}  // namespace pamforge
