#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lfm/spectral.hpp"
#include "lfm/tensor.hpp"

namespace lfm {

/// Causal trailing mean. y[t] averages x[max(0, t - window + 1) .. t], so the
/// window shrinks at the start and the output has the input's length.
std::vector<double> moving_average(std::span<const double> x, std::size_t window);

/// Elementwise (x + y) / 2.
std::vector<double> blend_with_original(std::span<const double> x, std::span<const double> y);

/// Mutable view of one trainable tensor and its gradient. Entries listed in
/// `pinned` are held at exactly zero by every optimizer.
struct ParamRef {
  std::string name;
  std::span<double> value;
  std::span<double> grad;
  std::vector<std::size_t> pinned;
};

/// Affine map applied independently to every row: out = x * weight + bias.
/// Over the time rows of a window this is a 1x1 convolution on the feature axis.
class PointwiseLinear {
 public:
  PointwiseLinear() = default;
  PointwiseLinear(Matrix weight, std::vector<double> bias);

  /// Weight with ones on the leading diagonal, zero bias.
  static PointwiseLinear identity(std::size_t in, std::size_t out);

  std::size_t in_features() const { return weight_.rows(); }
  std::size_t out_features() const { return weight_.cols(); }

  Matrix forward(const Matrix& x) const;
  /// Accumulates parameter gradients for input `x`; returns dL/dx.
  Matrix backward(const Matrix& x, const Matrix& grad_out);

  void zero_gradients();

  const Matrix& weight() const { return weight_; }
  Matrix& weight() { return weight_; }
  const std::vector<double>& bias() const { return bias_; }
  std::vector<double>& bias() { return bias_; }
  const Matrix& weight_grad() const { return weight_grad_; }
  const std::vector<double>& bias_grad() const { return bias_grad_; }

  void append_params(std::vector<ParamRef>& out, const std::string& prefix);

 private:
  Matrix weight_;
  std::vector<double> bias_;
  Matrix weight_grad_;
  std::vector<double> bias_grad_;
};

/// Trainable complex filter over the half-spectrum, one column per feature.
/// Imaginary parameters and gradients at the DC and Nyquist bins are zero.
class SpectralKernel {
 public:
  SpectralKernel() = default;
  /// Identity filter: 1 + 0i everywhere.
  SpectralKernel(std::size_t window_length, std::size_t width);
  /// Throws if the boundary imaginary entries are nonzero.
  SpectralKernel(std::size_t window_length, ComplexPlane values);

  std::size_t window_length() const { return window_length_; }
  std::size_t bins() const { return values_.rows(); }
  std::size_t width() const { return values_.cols(); }

  const ComplexPlane& values() const { return values_; }
  const ComplexPlane& grads() const { return grads_; }

  Spectrum apply(const Spectrum& s) const;

  /// Time-domain equivalent of one column: irfft of that column.
  std::vector<double> impulse_response(std::size_t column) const;

  void zero_gradients();
  void append_params(std::vector<ParamRef>& out, const std::string& prefix);

 private:
  friend class FilterModule;
  std::size_t window_length_ = 0;
  ComplexPlane values_;
  ComplexPlane grads_;
};

/// 1x1 lift -> FFT along time -> kernel product -> inverse FFT.
class FilterModule {
 public:
  FilterModule() = default;
  /// Identity kernel for windows of `window_length` steps.
  FilterModule(std::size_t window_length, PointwiseLinear lift);
  FilterModule(PointwiseLinear lift, SpectralKernel kernel);

  std::size_t window_length() const { return kernel_.window_length(); }
  std::size_t in_features() const { return lift_.in_features(); }
  std::size_t width() const { return kernel_.width(); }

  /// (n x F) -> (n x d); caches activations for backward().
  Matrix forward(const Matrix& x);
  /// Same result as forward() without touching the cache.
  Matrix infer(const Matrix& x) const;
  /// Accumulates gradients from the last forward(); returns dL/dx (n x F).
  Matrix backward(const Matrix& grad_out);

  void zero_gradients();
  std::vector<ParamRef> params();

  const PointwiseLinear& lift() const { return lift_; }
  PointwiseLinear& lift() { return lift_; }
  const SpectralKernel& kernel() const { return kernel_; }
  SpectralKernel& kernel() { return kernel_; }

 private:
  struct Activations {
    Matrix input;
    Matrix lifted;
    Spectrum spectrum;
    Spectrum filtered;
  };

  void check_input(const Matrix& x) const;

  PointwiseLinear lift_;
  SpectralKernel kernel_;
  std::optional<Activations> cache_;
};

}  // namespace lfm
