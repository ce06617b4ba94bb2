#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lfm {

/// Dense row-major real matrix. Used for windows (rows = time steps,
/// columns = features) and for layer weights.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  std::vector<double> column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> values);

  void fill(double v);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Complex array stored as separate real and imaginary planes of shape
/// (n_freq x width), row-major.
struct ComplexPlane {
  Matrix re;
  Matrix im;

  ComplexPlane() = default;
  ComplexPlane(std::size_t rows, std::size_t cols);
  ComplexPlane(Matrix re_part, Matrix im_part);

  std::size_t rows() const { return re.rows(); }
  std::size_t cols() const { return re.cols(); }
};

ComplexPlane elementwise_complex_multiply(const ComplexPlane& a, const ComplexPlane& b);

/// Real observations indexed (node, time, feature). Storage is one contiguous
/// time stream per (node, feature) pair. Immutable after construction.
class TimeSeriesTensor {
 public:
  static constexpr long kDefaultIntervalSeconds = 300;

  /// `values` is laid out [node][feature][time]. Throws on non-finite
  /// entries, zero dimensions, duplicate node ids or a bad interval.
  TimeSeriesTensor(std::size_t n_nodes, std::size_t n_steps, std::size_t n_features,
                   std::vector<double> values, std::vector<std::string> node_ids,
                   long interval_seconds = kDefaultIntervalSeconds);

  std::size_t n_nodes() const { return n_nodes_; }
  std::size_t n_steps() const { return n_steps_; }
  std::size_t n_features() const { return n_features_; }
  long interval_seconds() const { return interval_seconds_; }
  const std::vector<std::string>& node_ids() const { return node_ids_; }

  double at(std::size_t node, std::size_t t, std::size_t feature) const {
    return values_[(node * n_features_ + feature) * n_steps_ + t];
  }

  /// Full time stream of one (node, feature) pair.
  std::span<const double> stream(std::size_t node, std::size_t feature) const {
    return {values_.data() + (node * n_features_ + feature) * n_steps_, n_steps_};
  }

  /// Copy of steps [start, start + length) for one node as a (length x F) window.
  Matrix window(std::size_t node, std::size_t start, std::size_t length) const;

  std::span<const double> raw() const { return values_; }

 private:
  std::size_t n_nodes_;
  std::size_t n_steps_;
  std::size_t n_features_;
  std::vector<double> values_;
  std::vector<std::string> node_ids_;
  long interval_seconds_;
};

/// Independent copy of time steps [start, start + length).
TimeSeriesTensor slice_window(const TimeSeriesTensor& t, std::size_t start, std::size_t length);

}  // namespace lfm
