#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "lfm/tensor.hpp"

namespace lfm {

using cplx = std::complex<double>;

/// Half-spectrum of a real window of length n, one column per feature.
/// Rows are bins 0..n/2. The imaginary part of bin 0, and of bin n/2 when n
/// is even, is exactly zero.
class Spectrum {
 public:
  /// Validates the row count and the boundary-bin invariant.
  Spectrum(ComplexPlane planes, std::size_t window_length);

  static std::size_t half_length(std::size_t window_length) { return window_length / 2 + 1; }

  const ComplexPlane& planes() const { return planes_; }
  std::size_t window_length() const { return window_length_; }
  std::size_t bins() const { return planes_.rows(); }
  std::size_t width() const { return planes_.cols(); }

  cplx bin(std::size_t k, std::size_t column = 0) const {
    return {planes_.re(k, column), planes_.im(k, column)};
  }

  /// True when bin k must stay real (DC, and Nyquist for even lengths).
  static bool is_real_bin(std::size_t k, std::size_t window_length) {
    return k == 0 || (window_length % 2 == 0 && k == window_length / 2);
  }

  /// Reconstructs all n bins of one column using conjugate symmetry.
  std::vector<cplx> full(std::size_t column = 0) const;

 private:
  ComplexPlane planes_;
  std::size_t window_length_;
};

// O(n^2) reference transforms. Forward is unscaled, inverse carries 1/n.
std::vector<cplx> dft_reference(std::span<const double> x);
std::vector<cplx> dft_reference(std::span<const cplx> x);
std::vector<cplx> idft_reference(std::span<const cplx> spectrum);

// Fast complex transforms for any length, same normalization as above.
std::vector<cplx> fft(std::span<const cplx> x);
std::vector<cplx> ifft(std::span<const cplx> spectrum);

Spectrum rfft(std::span<const double> x);
/// Transforms every column of an (n x d) window along the time axis.
Spectrum rfft_columns(const Matrix& x);

std::vector<double> irfft(const Spectrum& s);
Matrix irfft_columns(const Spectrum& s);

/// Direct O(n^2) circular convolution, used as a test oracle.
std::vector<double> circular_convolve(std::span<const double> x, std::span<const double> k);

}  // namespace lfm
