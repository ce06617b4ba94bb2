#include "lfm/filters.hpp"

#include <algorithm>
#include <cmath>

#include "lfm/error.hpp"

namespace lfm {

std::vector<double> moving_average(std::span<const double> x, std::size_t window) {
  if (window == 0) throw InvalidArgument("moving_average window must be >= 1");
  std::vector<double> out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    const std::size_t first = t + 1 >= window ? t + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t i = first; i <= t; ++i) sum += x[i];
    out[t] = sum / static_cast<double>(t - first + 1);
  }
  return out;
}

std::vector<double> blend_with_original(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ShapeError(detail::concat("blend length mismatch: ", x.size(), " vs ", y.size()));
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = 0.5 * (x[i] + y[i]);
  return out;
}

// PointwiseLinear ------------------------------------------------------------

PointwiseLinear::PointwiseLinear(Matrix weight, std::vector<double> bias)
    : weight_(std::move(weight)),
      bias_(std::move(bias)),
      weight_grad_(weight_.rows(), weight_.cols()),
      bias_grad_(bias_.size(), 0.0) {
  if (bias_.size() != weight_.cols()) {
    throw ShapeError(detail::concat("bias of length ", bias_.size(), " does not match ",
                                    weight_.cols(), " output features"));
  }
  for (double v : weight_.flat()) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite weight in pointwise linear layer");
  }
  for (double v : bias_) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite bias in pointwise linear layer");
  }
}

PointwiseLinear PointwiseLinear::identity(std::size_t in, std::size_t out) {
  Matrix w(in, out);
  for (std::size_t i = 0; i < std::min(in, out); ++i) w(i, i) = 1.0;
  return PointwiseLinear(std::move(w), std::vector<double>(out, 0.0));
}

Matrix PointwiseLinear::forward(const Matrix& x) const {
  if (x.cols() != in_features()) {
    throw ShapeError(detail::concat("linear layer expects ", in_features(),
                                    " input features, got ", x.cols()));
  }
  Matrix out(x.rows(), out_features());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto o = out.row(r);
    std::copy(bias_.begin(), bias_.end(), o.begin());
    for (std::size_t i = 0; i < in_features(); ++i) {
      const double xi = x(r, i);
      if (xi == 0.0) continue;
      const auto w = weight_.row(i);
      for (std::size_t j = 0; j < o.size(); ++j) o[j] += xi * w[j];
    }
  }
  return out;
}

Matrix PointwiseLinear::backward(const Matrix& x, const Matrix& grad_out) {
  if (grad_out.rows() != x.rows() || grad_out.cols() != out_features()) {
    throw ShapeError(detail::concat("linear layer gradient is ", grad_out.rows(), "x",
                                    grad_out.cols(), ", expected ", x.rows(), "x",
                                    out_features()));
  }
  Matrix grad_in(x.rows(), in_features());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto g = grad_out.row(r);
    for (std::size_t j = 0; j < g.size(); ++j) bias_grad_[j] += g[j];
    for (std::size_t i = 0; i < in_features(); ++i) {
      const auto w = weight_.row(i);
      auto gw = weight_grad_.row(i);
      const double xi = x(r, i);
      double acc = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        gw[j] += xi * g[j];
        acc += g[j] * w[j];
      }
      grad_in(r, i) = acc;
    }
  }
  return grad_in;
}

void PointwiseLinear::zero_gradients() {
  weight_grad_.fill(0.0);
  std::fill(bias_grad_.begin(), bias_grad_.end(), 0.0);
}

void PointwiseLinear::append_params(std::vector<ParamRef>& out, const std::string& prefix) {
  out.push_back({prefix + ".weight", weight_.flat(), weight_grad_.flat(), {}});
  out.push_back({prefix + ".bias", bias_, bias_grad_, {}});
}

// SpectralKernel -------------------------------------------------------------

SpectralKernel::SpectralKernel(std::size_t window_length, std::size_t width)
    : window_length_(window_length),
      values_(Spectrum::half_length(window_length), width),
      grads_(Spectrum::half_length(window_length), width) {
  if (window_length == 0 || width == 0) {
    throw InvalidArgument("spectral kernel needs a positive window length and width");
  }
  values_.re.fill(1.0);
}

SpectralKernel::SpectralKernel(std::size_t window_length, ComplexPlane values)
    : window_length_(window_length), values_(std::move(values)) {
  if (window_length == 0 || values_.cols() == 0) {
    throw InvalidArgument("spectral kernel needs a positive window length and width");
  }
  // Reuses the spectrum validation for bin count and real boundary bins.
  Spectrum check(values_, window_length_);
  grads_ = ComplexPlane(values_.rows(), values_.cols());
}

Spectrum SpectralKernel::apply(const Spectrum& s) const {
  if (s.window_length() != window_length_ || s.width() != width()) {
    throw ShapeError(detail::concat("kernel for (n=", window_length_, ", d=", width(),
                                    ") applied to spectrum of (n=", s.window_length(),
                                    ", d=", s.width(), ")"));
  }
  return Spectrum(elementwise_complex_multiply(values_, s.planes()), window_length_);
}

std::vector<double> SpectralKernel::impulse_response(std::size_t column) const {
  ComplexPlane col(bins(), 1);
  for (std::size_t k = 0; k < bins(); ++k) {
    col.re(k, 0) = values_.re(k, column);
    col.im(k, 0) = values_.im(k, column);
  }
  return irfft(Spectrum(std::move(col), window_length_));
}

void SpectralKernel::zero_gradients() {
  grads_.re.fill(0.0);
  grads_.im.fill(0.0);
}

void SpectralKernel::append_params(std::vector<ParamRef>& out, const std::string& prefix) {
  std::vector<std::size_t> pinned;
  for (std::size_t k = 0; k < bins(); ++k) {
    if (!Spectrum::is_real_bin(k, window_length_)) continue;
    for (std::size_t c = 0; c < width(); ++c) pinned.push_back(k * width() + c);
  }
  out.push_back({prefix + ".re", values_.re.flat(), grads_.re.flat(), {}});
  out.push_back({prefix + ".im", values_.im.flat(), grads_.im.flat(), std::move(pinned)});
}

// FilterModule ---------------------------------------------------------------

FilterModule::FilterModule(std::size_t window_length, PointwiseLinear lift)
    : lift_(std::move(lift)), kernel_(window_length, lift_.out_features()) {}

FilterModule::FilterModule(PointwiseLinear lift, SpectralKernel kernel)
    : lift_(std::move(lift)), kernel_(std::move(kernel)) {
  if (lift_.out_features() != kernel_.width()) {
    throw ShapeError(detail::concat("lift produces ", lift_.out_features(),
                                    " features but kernel width is ", kernel_.width()));
  }
}

void FilterModule::check_input(const Matrix& x) const {
  if (x.rows() != window_length() || x.cols() != in_features()) {
    throw ShapeError(detail::concat("filter input is (", x.rows(), ", ", x.cols(),
                                    "), expected (", window_length(), ", ", in_features(), ")"));
  }
}

Matrix FilterModule::infer(const Matrix& x) const {
  check_input(x);
  return irfft_columns(kernel_.apply(rfft_columns(lift_.forward(x))));
}

Matrix FilterModule::forward(const Matrix& x) {
  check_input(x);
  Matrix lifted = lift_.forward(x);
  Spectrum spectrum = rfft_columns(lifted);
  Spectrum filtered = kernel_.apply(spectrum);
  Matrix out = irfft_columns(filtered);
  cache_.emplace(Activations{x, std::move(lifted), std::move(spectrum), std::move(filtered)});
  return out;
}

Matrix FilterModule::backward(const Matrix& grad_out) {
  if (!cache_) throw Error("filter backward called without a cached forward pass");
  const std::size_t n = window_length();
  const std::size_t d = width();
  if (grad_out.rows() != n || grad_out.cols() != d) {
    throw ShapeError(detail::concat("filter output gradient is (", grad_out.rows(), ", ",
                                    grad_out.cols(), "), expected (", n, ", ", d, ")"));
  }
  const Spectrum& s = cache_->spectrum;
  const ComplexPlane& k = kernel_.values_;
  ComplexPlane& gk = kernel_.grads_;

  // Adjoint of the inverse transform: dL/d(filtered bin k) = (c_k / n) * rfft(grad_out)_k,
  // with c_k = 1 on real bins and 2 on bins standing for a conjugate pair.
  const Spectrum g = rfft_columns(grad_out);
  ComplexPlane grad_spectrum(s.bins(), d);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t b = 0; b < s.bins(); ++b) {
    const bool real_bin = Spectrum::is_real_bin(b, n);
    const double weight = (real_bin ? 1.0 : 2.0) * inv_n;
    for (std::size_t c = 0; c < d; ++c) {
      const double tr = weight * g.planes().re(b, c);
      const double ti = weight * g.planes().im(b, c);
      const double sr = s.planes().re(b, c);
      const double si = s.planes().im(b, c);
      const double kr = k.re(b, c);
      const double ki = k.im(b, c);
      // Kernel: conj(s) * t.
      gk.re(b, c) += sr * tr + si * ti;
      if (!real_bin) gk.im(b, c) += sr * ti - si * tr;
      // Input spectrum: conj(K) * t, then the forward transform's adjoint,
      // which is n * irfft of the bins divided by c_k.
      const double scale = real_bin ? 1.0 : 0.5;
      grad_spectrum.re(b, c) = scale * (kr * tr + ki * ti);
      grad_spectrum.im(b, c) = real_bin ? 0.0 : scale * (kr * ti - ki * tr);
    }
  }
  Matrix grad_lifted = irfft_columns(Spectrum(std::move(grad_spectrum), n));
  for (double& v : grad_lifted.flat()) v *= static_cast<double>(n);
  return lift_.backward(cache_->input, grad_lifted);
}

void FilterModule::zero_gradients() {
  lift_.zero_gradients();
  kernel_.zero_gradients();
}

std::vector<ParamRef> FilterModule::params() {
  std::vector<ParamRef> out;
  lift_.append_params(out, "filter.lift");
  kernel_.append_params(out, "filter.kernel");
  return out;
}

}  // namespace lfm
