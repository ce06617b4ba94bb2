#include "lfm/spectral.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "lfm/error.hpp"

namespace lfm {
namespace {

// Prime factors above this are handled by Bluestein's chirp transform so the
// generic butterfly never costs more than O(n * kMaxDirectRadix).
constexpr std::size_t kMaxDirectRadix = 31;

cplx unit_root(std::size_t numerator, std::size_t denominator) {
  // exp(-2 pi i * numerator / denominator), numerator reduced first for accuracy.
  const double angle = -2.0 * std::numbers::pi * static_cast<double>(numerator % denominator) /
                       static_cast<double>(denominator);
  return {std::cos(angle), std::sin(angle)};
}

struct FftPlan {
  std::size_t n = 0;
  std::vector<std::size_t> radices;
  std::vector<cplx> twiddles;

  // Bluestein path.
  bool chirp = false;
  std::size_t padded = 0;
  std::vector<cplx> chirp_factors;
  std::vector<cplx> chirp_filter_spectrum;
};

const FftPlan& plan_for(std::size_t n);
void execute(const FftPlan& plan, const cplx* in, cplx* out);

void butterfly(const FftPlan& plan, cplx* out, std::size_t fstride, std::size_t m,
               std::size_t radix) {
  const auto& tw = plan.twiddles;
  if (radix == 2) {
    for (std::size_t u = 0; u < m; ++u) {
      const cplx t = out[u + m] * tw[u * fstride];
      out[u + m] = out[u] - t;
      out[u] += t;
    }
    return;
  }
  std::vector<cplx> scratch(radix);
  for (std::size_t u = 0; u < m; ++u) {
    for (std::size_t q = 0, k = u; q < radix; ++q, k += m) scratch[q] = out[k];
    for (std::size_t q1 = 0, k = u; q1 < radix; ++q1, k += m) {
      std::size_t idx = 0;
      cplx acc = scratch[0];
      for (std::size_t q = 1; q < radix; ++q) {
        idx += fstride * k;
        if (idx >= plan.n) idx -= plan.n;
        acc += scratch[q] * tw[idx];
      }
      out[k] = acc;
    }
  }
}

// Decimation in time over plan.radices[level..]. `n_sub` points are read from
// `in` with stride `fstride` and written contiguously to `out`.
void recurse(const FftPlan& plan, cplx* out, const cplx* in, std::size_t fstride,
             std::size_t level, std::size_t n_sub) {
  const std::size_t radix = plan.radices[level];
  const std::size_t m = n_sub / radix;
  if (m == 1) {
    for (std::size_t j = 0; j < radix; ++j) out[j] = in[j * fstride];
  } else {
    for (std::size_t q = 0; q < radix; ++q) {
      recurse(plan, out + q * m, in + q * fstride, fstride * radix, level + 1, m);
    }
  }
  butterfly(plan, out, fstride, m, radix);
}

std::unique_ptr<FftPlan> build_plan(std::size_t n) {
  auto plan = std::make_unique<FftPlan>();
  plan->n = n;
  std::size_t rest = n;
  for (std::size_t p = 2; p * p <= rest; ++p) {
    while (rest % p == 0) {
      plan->radices.push_back(p);
      rest /= p;
    }
  }
  if (rest > 1) plan->radices.push_back(rest);
  if (plan->radices.empty()) plan->radices.push_back(1);

  if (plan->radices.back() > kMaxDirectRadix) {
    plan->chirp = true;
    plan->radices.clear();
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;
    plan->padded = m;
    plan->chirp_factors.resize(n);
    const std::size_t period = 2 * n;
    for (std::size_t k = 0; k < n; ++k) {
      // exp(-i pi k^2 / n) with k^2 reduced modulo 2n.
      const auto k2 = static_cast<std::size_t>((static_cast<unsigned long long>(k) * k) % period);
      plan->chirp_factors[k] = unit_root(k2, period);
    }
    std::vector<cplx> filter(m, cplx{});
    filter[0] = std::conj(plan->chirp_factors[0]);
    for (std::size_t k = 1; k < n; ++k) {
      filter[k] = std::conj(plan->chirp_factors[k]);
      filter[m - k] = filter[k];
    }
    plan->chirp_filter_spectrum.resize(m);
    execute(plan_for(m), filter.data(), plan->chirp_filter_spectrum.data());
    return plan;
  }

  plan->twiddles.resize(n);
  for (std::size_t k = 0; k < n; ++k) plan->twiddles[k] = unit_root(k, n);
  return plan;
}

const FftPlan& plan_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<const FftPlan>> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(n); it != cache.end()) return *it->second;
  }
  // Built outside the lock: a chirp plan requests its power-of-two plan.
  auto plan = build_plan(n);
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.try_emplace(n, std::move(plan));
  return *it->second;
}

void execute(const FftPlan& plan, const cplx* in, cplx* out) {
  if (!plan.chirp) {
    if (plan.n == 1) {
      out[0] = in[0];
      return;
    }
    recurse(plan, out, in, 1, 0, plan.n);
    return;
  }
  const std::size_t n = plan.n;
  const std::size_t m = plan.padded;
  const FftPlan& inner = plan_for(m);
  std::vector<cplx> a(m, cplx{});
  for (std::size_t k = 0; k < n; ++k) a[k] = in[k] * plan.chirp_factors[k];
  std::vector<cplx> af(m);
  execute(inner, a.data(), af.data());
  // Inverse of the product through conjugation: ifft(z) = conj(fft(conj(z))) / m.
  for (std::size_t k = 0; k < m; ++k) af[k] = std::conj(af[k] * plan.chirp_filter_spectrum[k]);
  execute(inner, af.data(), a.data());
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) out[k] = plan.chirp_factors[k] * std::conj(a[k]) * scale;
}

void require_nonempty(std::size_t n, const char* what) {
  if (n == 0) throw InvalidArgument(std::string(what) + ": input sequence is empty");
}

}  // namespace

Spectrum::Spectrum(ComplexPlane planes, std::size_t window_length)
    : planes_(std::move(planes)), window_length_(window_length) {
  if (window_length_ == 0) throw InvalidArgument("spectrum window length must be positive");
  if (planes_.rows() != half_length(window_length_)) {
    throw ShapeError(detail::concat("spectrum of a length-", window_length_, " window needs ",
                                    half_length(window_length_), " bins, got ", planes_.rows()));
  }
  for (std::size_t c = 0; c < planes_.cols(); ++c) {
    if (planes_.im(0, c) != 0.0) {
      throw InvalidArgument(detail::concat("DC bin of column ", c,
                                           " has nonzero imaginary part ", planes_.im(0, c),
                                           "; reconstruction would not be real"));
    }
    if (window_length_ % 2 == 0 && planes_.im(window_length_ / 2, c) != 0.0) {
      throw InvalidArgument(detail::concat("Nyquist bin of column ", c,
                                           " has nonzero imaginary part ",
                                           planes_.im(window_length_ / 2, c),
                                           "; reconstruction would not be real"));
    }
  }
}

std::vector<cplx> Spectrum::full(std::size_t column) const {
  const std::size_t n = window_length_;
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < bins(); ++k) out[k] = bin(k, column);
  for (std::size_t k = bins(); k < n; ++k) out[k] = std::conj(out[n - k]);
  return out;
}

std::vector<cplx> dft_reference(std::span<const double> x) {
  require_nonempty(x.size(), "dft_reference");
  std::vector<cplx> in(x.begin(), x.end());
  return dft_reference(std::span<const cplx>(in));
}

std::vector<cplx> dft_reference(std::span<const cplx> x) {
  require_nonempty(x.size(), "dft_reference");
  const std::size_t n = x.size();
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc{};
    for (std::size_t j = 0; j < n; ++j) acc += x[j] * unit_root(j * k, n);
    out[k] = acc;
  }
  return out;
}

std::vector<cplx> idft_reference(std::span<const cplx> spectrum) {
  require_nonempty(spectrum.size(), "idft_reference");
  const std::size_t n = spectrum.size();
  std::vector<cplx> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    cplx acc{};
    for (std::size_t k = 0; k < n; ++k) acc += spectrum[k] * std::conj(unit_root(j * k, n));
    out[j] = acc / static_cast<double>(n);
  }
  return out;
}

std::vector<cplx> fft(std::span<const cplx> x) {
  require_nonempty(x.size(), "fft");
  std::vector<cplx> out(x.size());
  execute(plan_for(x.size()), x.data(), out.data());
  return out;
}

std::vector<cplx> ifft(std::span<const cplx> spectrum) {
  require_nonempty(spectrum.size(), "ifft");
  const std::size_t n = spectrum.size();
  std::vector<cplx> in(n);
  for (std::size_t k = 0; k < n; ++k) in[k] = std::conj(spectrum[k]);
  std::vector<cplx> out(n);
  execute(plan_for(n), in.data(), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : out) v = std::conj(v) * scale;
  return out;
}

Spectrum rfft(std::span<const double> x) {
  require_nonempty(x.size(), "rfft");
  Matrix column(x.size(), 1, std::vector<double>(x.begin(), x.end()));
  return rfft_columns(column);
}

Spectrum rfft_columns(const Matrix& x) {
  const std::size_t n = x.rows();
  require_nonempty(n, "rfft");
  const std::size_t half = Spectrum::half_length(n);
  const FftPlan& plan = plan_for(n);
  ComplexPlane planes(half, x.cols());
  std::vector<cplx> in(n), out(n);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    for (std::size_t t = 0; t < n; ++t) in[t] = x(t, c);
    execute(plan, in.data(), out.data());
    for (std::size_t k = 0; k < half; ++k) {
      planes.re(k, c) = out[k].real();
      // Boundary bins of a real signal are real; drop rounding residue.
      planes.im(k, c) = Spectrum::is_real_bin(k, n) ? 0.0 : out[k].imag();
    }
  }
  return Spectrum(std::move(planes), n);
}

std::vector<double> irfft(const Spectrum& s) {
  if (s.width() != 1) {
    throw ShapeError(detail::concat("irfft expects a single-column spectrum, got ", s.width(),
                                    " columns"));
  }
  return irfft_columns(s).column(0);
}

Matrix irfft_columns(const Spectrum& s) {
  const std::size_t n = s.window_length();
  const FftPlan& plan = plan_for(n);
  Matrix out(n, s.width());
  std::vector<cplx> in(n), res(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t c = 0; c < s.width(); ++c) {
    const auto full = s.full(c);
    for (std::size_t k = 0; k < n; ++k) in[k] = std::conj(full[k]);
    execute(plan, in.data(), res.data());
    // Conjugate symmetry makes the result real; only the real part is kept.
    for (std::size_t t = 0; t < n; ++t) out(t, c) = res[t].real() * scale;
  }
  return out;
}

std::vector<double> circular_convolve(std::span<const double> x, std::span<const double> k) {
  if (x.size() != k.size()) {
    throw ShapeError(detail::concat("circular_convolve length mismatch: ", x.size(), " vs ",
                                    k.size()));
  }
  require_nonempty(x.size(), "circular_convolve");
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * k[(m + n - i) % n];
    out[m] = acc;
  }
  return out;
}

}  // namespace lfm
