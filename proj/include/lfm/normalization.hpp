#pragma once

#include <cstddef>
#include <vector>

#include "lfm/tensor.hpp"

namespace lfm {

/// Contiguous range of time steps [start, start + length).
struct TimeRange {
  std::size_t start = 0;
  std::size_t length = 0;

  std::size_t end() const { return start + length; }
};

/// Per-feature z-score statistics. A default-constructed instance is unfitted.
class NormStats {
 public:
  NormStats() = default;
  /// Throws InvalidArgument if any std is not strictly positive and finite.
  NormStats(std::vector<double> mean, std::vector<double> std);

  bool fitted() const { return !mean_.empty(); }
  std::size_t n_features() const { return mean_.size(); }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& std() const { return std_; }

  double apply(double x, std::size_t feature) const { return (x - mean_[feature]) / std_[feature]; }
  double invert(double z, std::size_t feature) const { return z * std_[feature] + mean_[feature]; }

  /// Column c of `window` is feature c.
  Matrix apply(const Matrix& window) const;
  Matrix invert(const Matrix& window) const;

 private:
  void check_width(const Matrix& window) const;

  std::vector<double> mean_;
  std::vector<double> std_;
};

/// Population mean and standard deviation per feature over all nodes within
/// `train_range`. Throws naming the feature when its variance is zero.
NormStats fit_normalization(const TimeSeriesTensor& series, TimeRange train_range);

}  // namespace lfm
