#pragma once

// Negacyclic products over doubles. A real polynomial of length n folds into
// n/2 complex points f_j + i f_(j+n/2); twisting point j by exp(i pi j / n)
// turns reduction mod X^(n/2) - i into a cyclic convolution. Integer results
// are exact while every output coefficient stays far below 2^52. Complex
// products are written out to skip the NaN-checking library multiply.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <new>
#include <numbers>
#include <vector>

#include "fhe/modular.hpp"

namespace fhe {

// 64-byte aligned storage so the SIMD plans apply to every buffer.
template <class T>
struct FftAllocator {
  using value_type = T;
  FftAllocator() = default;
  template <class U>
  FftAllocator(const FftAllocator<U>&) {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{64})); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, std::align_val_t{64}); }
  template <class U>
  bool operator==(const FftAllocator<U>&) const { return true; }
};

using Spectrum = std::vector<std::complex<double>, FftAllocator<std::complex<double>>>;

// Nearest integer for |x| < 2^51.
inline i64 round_small(double x) {
  constexpr double magic = 6755399441055744.0;  // 1.5 * 2^52
  return static_cast<i64>((x + magic) - magic);
}

class NegacyclicFft {
 public:
  using Cplx = std::complex<double>;

  explicit NegacyclicFft(std::size_t n) : n_(n), half_(n / 2) {
    require(n >= 2 && (n & (n - 1)) == 0, ErrorCode::BadModulus, "FFT size must be a power of two >= 2");
    twist_.resize(half_);
    untwist_.resize(half_);
    for (std::size_t j = 0; j < half_; ++j) {
      const double angle = std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_);
      twist_[j] = std::polar(1.0, angle);
      untwist_[j] = std::polar(1.0 / static_cast<double>(half_), -angle);
    }
    Spectrum buf(half_);
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    const int h = static_cast<int>(half_);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_1d(h, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_1d(h, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  ~NegacyclicFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }

  NegacyclicFft(const NegacyclicFft&) = delete;
  NegacyclicFft& operator=(const NegacyclicFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t spectrum_size() const { return half_; }

  // out receives n/2 points for the integer coefficients f[0..n). Buffers
  // passed here and to inverse must be Spectrum storage.
  template <class Int>
  void forward(const Int* f, Cplx* out) const {
    for (std::size_t j = 0; j < half_; ++j) {
      const double re = static_cast<double>(f[j]), im = static_cast<double>(f[j + half_]);
      const Cplx w = twist_[j];
      out[j] = Cplx(re * w.real() - im * w.imag(), re * w.imag() + im * w.real());
    }
    auto* p = reinterpret_cast<fftw_complex*>(out);
    fftw_execute_dft(fwd_, p, p);
  }

  // Overwrites the spectrum and writes the rounded integer coefficients to f.
  void inverse(Cplx* spec, i64* f) const {
    auto* p = reinterpret_cast<fftw_complex*>(spec);
    fftw_execute_dft(inv_, p, p);
    for (std::size_t j = 0; j < half_; ++j) {
      const Cplx z = spec[j], w = untwist_[j];
      f[j] = round_small(z.real() * w.real() - z.imag() * w.imag());
      f[j + half_] = round_small(z.real() * w.imag() + z.imag() * w.real());
    }
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  std::size_t n_, half_;
  std::vector<Cplx> twist_, untwist_;
  fftw_plan fwd_ = nullptr, inv_ = nullptr;
};

}  // namespace fhe
