#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "lfm/error.hpp"
#include "lfm/filters.hpp"
#include "oracles.hpp"

namespace lfm {
namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  return Matrix(r, c, oracle::random_vector(r * c, seed));
}

// Random kernel values that respect the real-boundary-bin constraint.
SpectralKernel random_kernel(std::size_t n, std::size_t d, std::uint64_t seed) {
  const std::size_t bins = n / 2 + 1;
  Matrix re = random_matrix(bins, d, seed);
  Matrix im = random_matrix(bins, d, seed + 1);
  for (std::size_t c = 0; c < d; ++c) {
    im(0, c) = 0.0;
    if (n % 2 == 0) im(n / 2, c) = 0.0;
  }
  return SpectralKernel(n, ComplexPlane(std::move(re), std::move(im)));
}

FilterModule random_module(std::size_t n, std::size_t f, std::size_t d, std::uint64_t seed) {
  PointwiseLinear lift(random_matrix(f, d, seed), oracle::random_vector(d, seed + 7));
  return FilterModule(std::move(lift), random_kernel(n, d, seed + 13));
}

double weighted_sum(const Matrix& y, const Matrix& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y.flat()[i] * w.flat()[i];
  return s;
}

TEST(MovingAverage, ConstantIsUnchanged) {
  const std::vector<double> x(9, 4.5);
  for (std::size_t w : {1u, 2u, 5u, 20u}) EXPECT_EQ(moving_average(x, w), x);
}

TEST(MovingAverage, ShrinkingThenFullWindow) {
  const std::vector<double> x{0, 0, 0, 1, 0, 0, 0};
  const auto y = moving_average(x, 5);
  const std::vector<double> expect{0, 0, 0, 0.25, 0.2, 0.2, 0.2};
  ASSERT_EQ(y.size(), expect.size());
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_DOUBLE_EQ(y[i], expect[i]) << i;
}

TEST(MovingAverage, WindowOneIsIdentityAndZeroThrows) {
  const auto x = oracle::random_vector(13, 4);
  EXPECT_EQ(moving_average(x, 1), x);
  EXPECT_THROW(moving_average(x, 0), InvalidArgument);
}

TEST(MovingAverage, StaysWithinInputRange) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = oracle::random_vector(1 + rng() % 50, rng(), -100.0, 100.0);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    for (double v : moving_average(x, 1 + rng() % 10)) {
      EXPECT_GE(v, *lo - 1e-12);
      EXPECT_LE(v, *hi + 1e-12);
    }
  }
}

TEST(Blend, MeanOfInputs) {
  const auto x = oracle::random_vector(6, 1);
  EXPECT_EQ(blend_with_original(x, x), x);
  EXPECT_EQ(blend_with_original(std::vector<double>{0, 2}, std::vector<double>{2, 0}),
            (std::vector<double>{1, 1}));
  EXPECT_THROW(blend_with_original(x, std::vector<double>{1.0}), ShapeError);
}

TEST(Blend, ShrinksSpikeOnConstantBackground) {
  std::vector<double> x(12, 50.0);
  x[6] = 80.0;
  const auto y = blend_with_original(x, moving_average(x, 5));
  double peak_raw = 0.0, peak_blend = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    peak_raw = std::max(peak_raw, std::abs(x[i] - 50.0));
    peak_blend = std::max(peak_blend, std::abs(y[i] - 50.0));
  }
  // Spike position: (80 + mean(50,50,50,50,80)) / 2 - 50 = 18.
  EXPECT_DOUBLE_EQ(peak_blend, 18.0);
  EXPECT_LT(peak_blend, peak_raw);
}

TEST(SpectralKernel, FreshKernelIsIdentityWithZeroGradients) {
  const SpectralKernel k(10, 3);
  EXPECT_EQ(k.bins(), 6u);
  for (double v : k.values().re.flat()) EXPECT_EQ(v, 1.0);
  for (double v : k.values().im.flat()) EXPECT_EQ(v, 0.0);
  for (double v : k.grads().re.flat()) EXPECT_EQ(v, 0.0);
  for (double v : k.grads().im.flat()) EXPECT_EQ(v, 0.0);
}

TEST(SpectralKernel, RejectsComplexBoundaryBins) {
  ComplexPlane p(5, 1);
  p.im(4, 0) = 0.1;  // Nyquist of n = 8
  EXPECT_THROW(SpectralKernel(8, p), InvalidArgument);
}

TEST(FilterForward, IdentityKernelAndLiftIsPassThrough) {
  for (std::size_t n : {1u, 2u, 7u, 12u}) {
    FilterModule m(n, PointwiseLinear::identity(3, 3));
    const Matrix x = random_matrix(n, 3, n);
    const Matrix y = m.forward(x);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y.flat()[i], x.flat()[i], 1e-9);
    const Matrix z = m.infer(x);
    EXPECT_EQ(z, y);
  }
}

TEST(FilterForward, ZeroKernelAnnihilates) {
  const std::size_t n = 8;
  SpectralKernel zero(n, ComplexPlane(5, 2));
  FilterModule m(PointwiseLinear::identity(2, 2), std::move(zero));
  const Matrix y = m.forward(random_matrix(n, 2, 3));
  for (double v : y.flat()) EXPECT_EQ(v, 0.0);
}

TEST(FilterForward, EqualsCircularConvolutionWithImpulseResponse) {
  for (std::size_t n = 2; n <= 32; ++n) {
    const std::size_t d = 2;
    FilterModule m(PointwiseLinear::identity(d, d), random_kernel(n, d, 50 + n));
    const Matrix x = random_matrix(n, d, 90 + n);
    const Matrix y = m.forward(x);
    for (std::size_t c = 0; c < d; ++c) {
      const auto expect = circular_convolve(x.column(c), m.kernel().impulse_response(c));
      for (std::size_t t = 0; t < n; ++t) ASSERT_NEAR(y(t, c), expect[t], 1e-8) << n;
    }
  }
}

TEST(FilterForward, ShapeMismatchNamesExpectedShape) {
  FilterModule m(8, PointwiseLinear::identity(2, 3));
  try {
    m.forward(Matrix(7, 2));
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("(8, 2)"), std::string::npos) << e.what();
  }
}

TEST(FilterBackward, RequiresForward) {
  FilterModule m(8, PointwiseLinear::identity(1, 1));
  EXPECT_THROW(m.backward(Matrix(8, 1)), Error);
}

TEST(FilterBackward, ZeroUpstreamGivesZeroGradients) {
  FilterModule m = random_module(8, 2, 3, 5);
  m.forward(random_matrix(8, 2, 6));
  const Matrix dx = m.backward(Matrix(8, 3));
  for (double v : dx.flat()) EXPECT_EQ(v, 0.0);
  for (const auto& p : m.params()) {
    for (double g : p.grad) EXPECT_EQ(g, 0.0) << p.name;
  }
}

TEST(FilterBackward, IdentityModuleSumLossGivesOnes) {
  FilterModule m(8, PointwiseLinear::identity(2, 2));
  m.forward(random_matrix(8, 2, 1));
  const Matrix dx = m.backward(Matrix(8, 2, 1.0));
  for (double v : dx.flat()) EXPECT_NEAR(v, 1.0, 1e-12);
}

// Central differences on L = sum(w * forward(x)) for every parameter and input.
void check_gradients(std::size_t n, std::size_t f, std::size_t d, std::uint64_t seed) {
  FilterModule m = random_module(n, f, d, seed);
  Matrix x = random_matrix(n, f, seed + 100);
  const Matrix w = random_matrix(n, d, seed + 200);

  m.zero_gradients();
  m.forward(x);
  const Matrix dx = m.backward(w);

  auto loss = [&] { return weighted_sum(m.infer(x), w); };
  for (auto& p : m.params()) {
    const std::vector<double> analytic(p.grad.begin(), p.grad.end());
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      if (std::find(p.pinned.begin(), p.pinned.end(), i) != p.pinned.end()) {
        EXPECT_EQ(analytic[i], 0.0) << p.name << "[" << i << "] must stay pinned";
        continue;
      }
      const double numeric = oracle::central_difference(loss, &p.value[i]);
      EXPECT_LT(oracle::relative_error(analytic[i], numeric), 1e-4)
          << p.name << "[" << i << "] analytic " << analytic[i] << " numeric " << numeric;
    }
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double numeric = oracle::central_difference(loss, &x.flat()[i]);
    EXPECT_LT(oracle::relative_error(dx.flat()[i], numeric), 1e-4) << "x[" << i << "]";
  }
}

TEST(FilterBackward, MatchesFiniteDifferences) {
  check_gradients(8, 2, 3, 1);
  check_gradients(8, 2, 3, 2);
}

TEST(FilterBackward, MatchesFiniteDifferencesOddAndTinyLengths) {
  for (std::size_t n : {1u, 2u, 3u, 5u, 9u, 12u}) check_gradients(n, 1, 2, 40 + n);
}

TEST(FilterBackward, GradientsAccumulateUntilZeroed) {
  FilterModule a = random_module(8, 2, 3, 11);
  FilterModule single1 = a, single2 = a;
  const Matrix x1 = random_matrix(8, 2, 1), x2 = random_matrix(8, 2, 2);
  const Matrix g1 = random_matrix(8, 3, 3), g2 = random_matrix(8, 3, 4);

  a.forward(x1);
  a.backward(g1);
  a.forward(x2);
  a.backward(g2);
  single1.forward(x1);
  single1.backward(g1);
  single2.forward(x2);
  single2.backward(g2);

  auto pa = a.params(), p1 = single1.params(), p2 = single2.params();
  for (std::size_t b = 0; b < pa.size(); ++b) {
    for (std::size_t i = 0; i < pa[b].grad.size(); ++i) {
      EXPECT_NEAR(pa[b].grad[i], p1[b].grad[i] + p2[b].grad[i], 1e-12) << pa[b].name;
    }
  }
  a.zero_gradients();
  for (const auto& p : a.params()) {
    for (double g : p.grad) EXPECT_EQ(g, 0.0);
  }
}

TEST(PointwiseLinear, IdentityShapesAndForward) {
  const auto l = PointwiseLinear::identity(2, 4);
  const Matrix x = random_matrix(5, 2, 8);
  const Matrix y = l.forward(x);
  ASSERT_EQ(y.cols(), 4u);
  for (std::size_t r = 0; r < 5; ++r) {
    EXPECT_EQ(y(r, 0), x(r, 0));
    EXPECT_EQ(y(r, 1), x(r, 1));
    EXPECT_EQ(y(r, 2), 0.0);
  }
  EXPECT_THROW(PointwiseLinear(Matrix(2, 3), {0.0}), ShapeError);
}

}  // namespace
}  // namespace lfm
