#include "lfm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "lfm/error.hpp"

namespace lfm {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError(detail::concat("matrix data has ", data_.size(), " entries, expected ", rows,
                                    "x", cols));
  }
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::set_column(std::size_t c, std::span<const double> values) {
  if (values.size() != rows_) {
    throw ShapeError(detail::concat("column of length ", values.size(), " does not fit ", rows_,
                                    " rows"));
  }
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

ComplexPlane::ComplexPlane(std::size_t rows, std::size_t cols) : re(rows, cols), im(rows, cols) {}

ComplexPlane::ComplexPlane(Matrix re_part, Matrix im_part)
    : re(std::move(re_part)), im(std::move(im_part)) {
  if (re.rows() != im.rows() || re.cols() != im.cols()) {
    throw ShapeError(detail::concat("real plane is ", re.rows(), "x", re.cols(),
                                    " but imaginary plane is ", im.rows(), "x", im.cols()));
  }
}

ComplexPlane elementwise_complex_multiply(const ComplexPlane& a, const ComplexPlane& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(detail::concat("complex multiply shape mismatch: ", a.rows(), "x", a.cols(),
                                    " vs ", b.rows(), "x", b.cols()));
  }
  ComplexPlane out(a.rows(), a.cols());
  const auto ar = a.re.flat(), ai = a.im.flat(), br = b.re.flat(), bi = b.im.flat();
  auto orr = out.re.flat(), oi = out.im.flat();
  for (std::size_t i = 0; i < ar.size(); ++i) {
    orr[i] = ar[i] * br[i] - ai[i] * bi[i];
    oi[i] = ar[i] * bi[i] + ai[i] * br[i];
  }
  return out;
}

TimeSeriesTensor::TimeSeriesTensor(std::size_t n_nodes, std::size_t n_steps,
                                   std::size_t n_features, std::vector<double> values,
                                   std::vector<std::string> node_ids, long interval_seconds)
    : n_nodes_(n_nodes),
      n_steps_(n_steps),
      n_features_(n_features),
      values_(std::move(values)),
      node_ids_(std::move(node_ids)),
      interval_seconds_(interval_seconds) {
  if (n_nodes_ == 0 || n_steps_ == 0 || n_features_ == 0) {
    throw ShapeError(detail::concat("tensor dimensions must be >= 1, got (", n_nodes_, ", ",
                                    n_steps_, ", ", n_features_, ")"));
  }
  if (values_.size() != n_nodes_ * n_steps_ * n_features_) {
    throw ShapeError(detail::concat("tensor of shape (", n_nodes_, ", ", n_steps_, ", ",
                                    n_features_, ") needs ", n_nodes_ * n_steps_ * n_features_,
                                    " values, got ", values_.size()));
  }
  if (node_ids_.size() != n_nodes_) {
    throw ShapeError(
        detail::concat("expected ", n_nodes_, " node ids, got ", node_ids_.size()));
  }
  if (interval_seconds_ <= 0) {
    throw InvalidArgument(
        detail::concat("interval_seconds must be positive, got ", interval_seconds_));
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : node_ids_) {
    if (!seen.insert(id).second) throw InvalidArgument("duplicate node id '" + id + "'");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      const std::size_t stream = i / n_steps_;
      throw InvalidArgument(detail::concat("non-finite value at node ", stream / n_features_,
                                           ", time ", i % n_steps_, ", feature ",
                                           stream % n_features_));
    }
  }
}

Matrix TimeSeriesTensor::window(std::size_t node, std::size_t start, std::size_t length) const {
  if (node >= n_nodes_ || start + length > n_steps_) {
    throw ShapeError(detail::concat("window [", start, ", ", start + length, ") of node ", node,
                                    " exceeds tensor with ", n_nodes_, " nodes and ", n_steps_,
                                    " steps"));
  }
  Matrix out(length, n_features_);
  for (std::size_t f = 0; f < n_features_; ++f) {
    const auto s = stream(node, f);
    for (std::size_t t = 0; t < length; ++t) out(t, f) = s[start + t];
  }
  return out;
}

TimeSeriesTensor slice_window(const TimeSeriesTensor& t, std::size_t start, std::size_t length) {
  if (length == 0) throw InvalidArgument("slice length must be positive");
  if (start + length > t.n_steps()) {
    throw ShapeError(detail::concat("requested time range [", start, ", ", start + length,
                                    ") but only [0, ", t.n_steps(), ") is available"));
  }
  std::vector<double> values;
  values.reserve(t.n_nodes() * t.n_features() * length);
  for (std::size_t n = 0; n < t.n_nodes(); ++n) {
    for (std::size_t f = 0; f < t.n_features(); ++f) {
      const auto s = t.stream(n, f).subspan(start, length);
      values.insert(values.end(), s.begin(), s.end());
    }
  }
  return TimeSeriesTensor(t.n_nodes(), length, t.n_features(), std::move(values), t.node_ids(),
                          t.interval_seconds());
}

}  // namespace lfm
