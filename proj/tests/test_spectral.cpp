#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lfm/error.hpp"
#include "lfm/spectral.hpp"
#include "oracles.hpp"

namespace lfm {
namespace {

std::vector<std::size_t> fast_path_lengths() {
  std::vector<std::size_t> ns;
  for (std::size_t n = 1; n <= 64; ++n) ns.push_back(n);
  ns.insert(ns.end(), {97, 128, 1000});
  return ns;
}

TEST(DftReference, ImpulseHasFlatSpectrum) {
  const std::vector<double> x{1, 0, 0, 0};
  for (const auto& v : dft_reference(x)) {
    EXPECT_NEAR(v.real(), 1.0, 1e-15);
    EXPECT_NEAR(v.imag(), 0.0, 1e-15);
  }
}

TEST(DftReference, ConstantConcentratesAtDc) {
  const double c = 2.5;
  const auto s = dft_reference(std::vector<double>{c, c, c, c});
  EXPECT_NEAR(s[0].real(), 4 * c, 1e-14);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_LT(std::abs(s[k]), 1e-14);
}

TEST(DftReference, MatchesCosSinExpansion) {
  const auto x = oracle::random_vector(7, 11);
  const auto fast = dft_reference(x);
  const auto slow = oracle::dft_cos_sin(x);
  for (std::size_t k = 0; k < 7; ++k) {
    EXPECT_NEAR(fast[k].real(), slow[k].real(), 1e-12);
    EXPECT_NEAR(fast[k].imag(), slow[k].imag(), 1e-12);
  }
}

TEST(DftReference, EmptyInputThrows) {
  EXPECT_THROW(dft_reference(std::vector<double>{}), InvalidArgument);
  EXPECT_THROW(idft_reference(std::vector<cplx>{}), InvalidArgument);
}

TEST(IdftReference, InvertsConstantCase) {
  const double c = -1.25;
  const auto x = idft_reference(std::vector<cplx>{{5 * c, 0}, 0, 0, 0, 0});
  for (const auto& v : x) {
    EXPECT_NEAR(v.real(), c, 1e-14);
    EXPECT_NEAR(v.imag(), 0.0, 1e-14);
  }
}

TEST(IdftReference, ZeroMapsToZero) {
  for (const auto& v : idft_reference(std::vector<cplx>(6))) EXPECT_EQ(std::abs(v), 0.0);
}

TEST(IdftReference, RoundTripIsIdentity) {
  const auto x = oracle::random_vector(5, 21);
  const auto back = idft_reference(dft_reference(x));
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(back[i].real(), x[i], 1e-10);
    EXPECT_NEAR(back[i].imag(), 0.0, 1e-10);
  }
}

TEST(Rfft, ImpulseHalfSpectrum) {
  const auto s = rfft(std::vector<double>{1, 0, 0, 0});
  ASSERT_EQ(s.bins(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_NEAR(s.bin(k).real(), 1.0, 1e-15);
    EXPECT_NEAR(s.bin(k).imag(), 0.0, 1e-15);
  }
}

TEST(Rfft, MatchesReferenceForAllLengths) {
  for (std::size_t n : fast_path_lengths()) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto x = oracle::random_vector(n, 1000 * n + seed);
      const auto ref = dft_reference(x);
      const auto s = rfft(x);
      ASSERT_EQ(s.bins(), n / 2 + 1);
      const double tol = 1e-9 * static_cast<double>(n);
      for (std::size_t k = 0; k < s.bins(); ++k) {
        ASSERT_NEAR(s.bin(k).real(), ref[k].real(), tol) << "n=" << n << " k=" << k;
        ASSERT_NEAR(s.bin(k).imag(), ref[k].imag(), tol) << "n=" << n << " k=" << k;
      }
    }
  }
}

TEST(Rfft, ComplexFastTransformMatchesReferenceOnComplexInput) {
  for (std::size_t n : {1u, 6u, 12u, 37u, 97u, 210u}) {
    const auto re = oracle::random_vector(n, n), im = oracle::random_vector(n, n + 1);
    std::vector<cplx> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = {re[i], im[i]};
    const auto fast = fft(x);
    const auto ref = dft_reference(x);
    for (std::size_t k = 0; k < n; ++k) ASSERT_LT(std::abs(fast[k] - ref[k]), 1e-9 * n) << n;
    const auto back = ifft(fast);
    for (std::size_t i = 0; i < n; ++i) ASSERT_LT(std::abs(back[i] - x[i]), 1e-12 * n) << n;
  }
}

TEST(Rfft, PureSinusoidLandsInOneBin) {
  const std::size_t n = 16;
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = std::cos(2.0 * std::numbers::pi * 3.0 * t / n);
  const auto s = rfft(x);
  for (std::size_t k = 0; k < s.bins(); ++k) {
    if (k == 3) {
      EXPECT_NEAR(std::abs(s.bin(k)), n / 2.0, 1e-9);
    } else {
      EXPECT_LT(std::abs(s.bin(k)), 1e-9) << k;
    }
  }
}

TEST(Rfft, BoundaryBinsAreExactlyReal) {
  for (std::size_t n : {1u, 2u, 7u, 8u, 97u, 128u}) {
    const auto s = rfft(oracle::random_vector(n, n));
    EXPECT_EQ(s.bin(0).imag(), 0.0);
    if (n % 2 == 0) EXPECT_EQ(s.bin(n / 2).imag(), 0.0);
  }
}

TEST(Rfft, Linearity) {
  for (std::size_t n : {5u, 12u, 31u, 64u}) {
    const auto x = oracle::random_vector(n, 1), y = oracle::random_vector(n, 2);
    const double a = 1.7, b = -0.4;
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = a * x[i] + b * y[i];
    const auto sx = rfft(x), sy = rfft(y), sz = rfft(z);
    for (std::size_t k = 0; k < sz.bins(); ++k) {
      const cplx expect = a * sx.bin(k) + b * sy.bin(k);
      EXPECT_NEAR(sz.bin(k).real(), expect.real(), 1e-9);
      EXPECT_NEAR(sz.bin(k).imag(), expect.imag(), 1e-9);
    }
  }
}

TEST(Rfft, Parseval) {
  for (std::size_t n = 1; n <= 40; ++n) {
    const auto x = oracle::random_vector(n, 77 + n);
    double energy = 0.0;
    for (double v : x) energy += v * v;
    double spectral = 0.0;
    for (const auto& v : rfft(x).full()) spectral += std::norm(v);
    spectral /= static_cast<double>(n);
    EXPECT_LE(std::abs(energy - spectral), 1e-8 * energy) << n;
  }
}

TEST(Irfft, RoundTrip) {
  for (std::size_t n : {1u, 2u, 3u, 8u, 12u, 100u}) {
    const auto x = oracle::random_vector(n, 5 * n);
    const auto back = irfft(rfft(x));
    ASSERT_EQ(back.size(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(back[i], x[i], 1e-9) << n;
  }
}

TEST(Irfft, DcOnlyAndZeroSpectra) {
  const std::size_t n = 6;
  ComplexPlane p(4, 1);
  p.re(0, 0) = n * 3.0;
  for (double v : irfft(Spectrum(p, n))) EXPECT_NEAR(v, 3.0, 1e-14);
  for (double v : irfft(Spectrum(ComplexPlane(4, 1), n))) EXPECT_EQ(v, 0.0);
}

TEST(Irfft, RejectsNonRealBoundaryBins) {
  ComplexPlane dc(4, 1);
  dc.im(0, 0) = 0.5;
  EXPECT_THROW(Spectrum(dc, 6), InvalidArgument);
  ComplexPlane nyquist(4, 1);
  nyquist.im(3, 0) = 0.5;
  EXPECT_THROW(Spectrum(nyquist, 6), InvalidArgument);
  // For odd n the last bin is an ordinary conjugate pair and may be complex.
  ComplexPlane odd(4, 1);
  odd.im(3, 0) = 0.5;
  EXPECT_NO_THROW(Spectrum(odd, 7));
  EXPECT_THROW(Spectrum(ComplexPlane(3, 1), 6), ShapeError);
}

TEST(CircularConvolve, DeltaIsIdentityAndShiftsRotate) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_EQ(circular_convolve(x, std::vector<double>{1, 0, 0, 0}), x);
  EXPECT_EQ(circular_convolve(x, std::vector<double>{0, 1, 0, 0}), (std::vector<double>{4, 1, 2, 3}));
  EXPECT_EQ(circular_convolve(x, std::vector<double>{0, 0, 1, 0}), (std::vector<double>{3, 4, 1, 2}));
  EXPECT_THROW(circular_convolve(x, std::vector<double>{1, 0}), ShapeError);
}

TEST(CircularConvolve, ConvolutionTheorem) {
  for (std::size_t n = 1; n <= 32; ++n) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto x = oracle::random_vector(n, 300 * n + seed);
      const auto k = oracle::random_vector(n, 900 * n + seed);
      const auto direct = circular_convolve(x, k);
      const Spectrum product(elementwise_complex_multiply(rfft(x).planes(), rfft(k).planes()), n);
      const auto via_fft = irfft(product);
      for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(via_fft[i], direct[i], 1e-8) << n;
    }
  }
}

TEST(RfftColumns, TransformsEachColumnIndependently) {
  Matrix m(9, 3);
  std::vector<std::vector<double>> cols;
  for (std::size_t c = 0; c < 3; ++c) {
    cols.push_back(oracle::random_vector(9, 40 + c));
    m.set_column(c, cols.back());
  }
  const auto s = rfft_columns(m);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto single = rfft(cols[c]);
    for (std::size_t k = 0; k < s.bins(); ++k) {
      EXPECT_EQ(s.bin(k, c), single.bin(k));
    }
  }
  const auto back = irfft_columns(s);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(back.flat()[i], m.flat()[i], 1e-12);
}

}  // namespace
}  // namespace lfm
