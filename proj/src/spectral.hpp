#pragma once

// Real-to-complex FFT machinery shared by the periodic operators.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "elsim/fields.hpp"

namespace elsim::detail {

using cplx = std::complex<double>;

/// fftw_malloc-backed buffer.
template <typename T>
class AlignedBuffer {
 public:
  explicit AlignedBuffer(std::size_t n) : n_(n), p_(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {
    if (!p_) throw std::bad_alloc();
  }
  ~AlignedBuffer() { fftw_free(p_); }
  AlignedBuffer(const AlignedBuffer&) = delete;
  AlignedBuffer& operator=(const AlignedBuffer&) = delete;
  AlignedBuffer(AlignedBuffer&& o) noexcept : n_(o.n_), p_(o.p_) {
    o.n_ = 0;
    o.p_ = nullptr;
  }
  AlignedBuffer& operator=(AlignedBuffer&& o) noexcept {
    if (this != &o) {
      fftw_free(p_);
      n_ = o.n_;
      p_ = o.p_;
      o.n_ = 0;
      o.p_ = nullptr;
    }
    return *this;
  }

  T* data() { return p_; }
  const T* data() const { return p_; }
  T& operator[](std::size_t i) { return p_[i]; }
  const T& operator[](std::size_t i) const { return p_[i]; }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  T* p_;
};

using Spectrum = AlignedBuffer<cplx>;

/// Plans and wavenumber tables for one grid shape. Immutable after construction;
/// transforms allocate their own scratch so concurrent use is safe.
class SpectralEngine {
 public:
  static const SpectralEngine& get(const Grid& grid);

  explicit SpectralEngine(const Grid& grid);
  ~SpectralEngine();
  SpectralEngine(const SpectralEngine&) = delete;
  SpectralEngine& operator=(const SpectralEngine&) = delete;

  std::size_t real_size() const { return real_size_; }
  std::size_t spectral_size() const { return spec_size_; }

  Spectrum forward(const std::vector<double>& in) const;
  /// Normalised inverse transform into `out` (resized to the grid size).
  void inverse(const Spectrum& in, std::vector<double>& out) const;

  /// Derivative wavenumber along an axis for each spectral coefficient (zero at Nyquist).
  const std::vector<double>& k(int axis) const { return k_[axis]; }
  /// Signed integer mode index along an axis for each spectral coefficient.
  const std::vector<int>& mode(int axis) const { return mode_[axis]; }

 private:
  std::size_t real_size_ = 0;
  std::size_t spec_size_ = 0;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
  std::array<std::vector<double>, 3> k_;
  std::array<std::vector<int>, 3> mode_;
};

}  // namespace elsim::detail
