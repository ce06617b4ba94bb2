#include "lfm/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <vector>

namespace lfm {
namespace {

constexpr std::array<char, 8> kMagic{'L', 'F', 'M', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint64_t kMaxDimension = std::uint64_t{1} << 24;
constexpr std::uint64_t kMaxParameters = std::uint64_t{1} << 32;

template <typename U>
void put_le(std::ostream& out, U v) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

void put_f64s(std::ostream& out, std::span<const double> values) {
  for (double v : values) put_f64(out, v);
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw CheckpointTruncatedError(detail::concat("checkpoint truncated while reading ", what,
                                                    " at byte offset ", offset_ + in_.gcount()));
    }
    offset_ += n;
  }

  template <typename U>
  U le(const char* what) {
    std::array<unsigned char, sizeof(U)> b{};
    bytes(reinterpret_cast<char*>(b.data()), b.size(), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
    return v;
  }

  std::vector<double> f64s(std::size_t n, const char* what) {
    // Grows as it reads so a corrupt count fails on truncation, not allocation.
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::bit_cast<double>(le<std::uint64_t>(what)));
    return out;
  }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
  std::size_t offset_ = 0;
};

void check_expected(const char* name, std::optional<std::size_t> expected, std::size_t actual) {
  if (expected && *expected != actual) {
    throw CheckpointShapeError(detail::concat("checkpoint has ", name, "=", actual,
                                              " but the request expects ", name, "=", *expected));
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const FilterPredictor& predictor) {
  const auto& shape = predictor.shape();
  const auto& kernel = predictor.filter().kernel();
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, 0);
  put_le<std::uint64_t>(out, shape.history);
  put_le<std::uint64_t>(out, shape.horizon);
  put_le<std::uint64_t>(out, shape.features);
  put_le<std::uint64_t>(out, shape.width);
  put_le<std::uint64_t>(out, kernel.bins());
  put_f64s(out, predictor.stats().mean());
  put_f64s(out, predictor.stats().std());
  put_f64s(out, predictor.filter().lift().weight().flat());
  put_f64s(out, predictor.filter().lift().bias());
  put_f64s(out, kernel.values().re.flat());
  put_f64s(out, kernel.values().im.flat());
  put_f64s(out, predictor.readout().weight().flat());
  put_f64s(out, predictor.readout().bias());
}

FilterPredictor read_checkpoint(std::istream& in, const ShapeExpectation& expect) {
  Reader r(in);
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size(), "magic");
  if (magic != kMagic) throw CheckpointFormatError("not a filter predictor checkpoint (bad magic)");
  const auto version = r.le<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw CheckpointVersionError(detail::concat("checkpoint format version ", version,
                                                " is not supported (expected ",
                                                kCheckpointVersion, ")"));
  }
  r.le<std::uint32_t>("reserved");
  const auto h = r.le<std::uint64_t>("history");
  const auto t = r.le<std::uint64_t>("horizon");
  const auto f = r.le<std::uint64_t>("features");
  const auto d = r.le<std::uint64_t>("width");
  const auto bins = r.le<std::uint64_t>("kernel bins");
  for (auto [name, v] : {std::pair{"history", h}, {"horizon", t}, {"features", f}, {"width", d}}) {
    if (v == 0 || v > kMaxDimension) {
      throw CheckpointShapeError(detail::concat("checkpoint ", name, "=", v, " is out of range"));
    }
  }
  if (bins != h / 2 + 1) {
    throw CheckpointShapeError(detail::concat("checkpoint kernel has ", bins,
                                              " bins but history ", h, " needs ", h / 2 + 1));
  }
  // Each factor is at most 2^24, so both partial products fit in 64 bits.
  if (h * d > kMaxParameters / (t * f)) {
    throw CheckpointShapeError(detail::concat("checkpoint readout of (", h * d, " x ", t * f,
                                              ") exceeds the parameter limit"));
  }
  check_expected("history", expect.history, h);
  check_expected("horizon", expect.horizon, t);
  check_expected("features", expect.features, f);
  check_expected("width", expect.width, d);

  auto mean = r.f64s(f, "normalization mean");
  auto stdev = r.f64s(f, "normalization std");
  auto lift_w = r.f64s(f * d, "lift weight");
  auto lift_b = r.f64s(d, "lift bias");
  auto k_re = r.f64s(bins * d, "kernel real plane");
  auto k_im = r.f64s(bins * d, "kernel imaginary plane");
  auto ro_w = r.f64s(h * d * t * f, "readout weight");
  auto ro_b = r.f64s(t * f, "readout bias");
  if (!r.at_end()) throw CheckpointShapeError("checkpoint has trailing bytes after the payload");

  try {
    PointwiseLinear lift(Matrix(f, d, std::move(lift_w)), std::move(lift_b));
    SpectralKernel kernel(h, ComplexPlane(Matrix(bins, d, std::move(k_re)),
                                          Matrix(bins, d, std::move(k_im))));
    PointwiseLinear readout(Matrix(h * d, t * f, std::move(ro_w)), std::move(ro_b));
    return FilterPredictor(FilterModule(std::move(lift), std::move(kernel)), std::move(readout),
                           NormStats(std::move(mean), std::move(stdev)), t);
  } catch (const CheckpointError&) {
    throw;
  } catch (const Error& e) {
    throw CheckpointShapeError(std::string("invalid checkpoint contents: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const FilterPredictor& predictor) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_checkpoint(out, predictor);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

FilterPredictor load_checkpoint(const std::filesystem::path& path, const ShapeExpectation& expect) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return read_checkpoint(in, expect);
}

}  // namespace lfm
