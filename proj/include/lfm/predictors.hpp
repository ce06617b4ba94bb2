#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "lfm/filters.hpp"
#include "lfm/metrics.hpp"
#include "lfm/normalization.hpp"
#include "lfm/tensor.hpp"

namespace lfm {

inline constexpr std::size_t kDefaultHistory = 12;
inline constexpr std::size_t kDefaultHorizon = 12;
inline constexpr std::size_t kDefaultMovingAverageWindow = 5;

/// Maps one node's history window (H x F) to a forecast block (horizon x F).
using Forecaster = std::function<Matrix(const Matrix& history, std::size_t horizon)>;

/// Repeats the last observed row `horizon` times.
Matrix copy_last_step(const Matrix& history, std::size_t horizon);

/// Moving average (trailing, `window` samples) blended 50/50 with the raw
/// history, then copy_last_step on the blended history.
Matrix filtered_copy_last_step(const Matrix& history, std::size_t horizon,
                               std::size_t window = kDefaultMovingAverageWindow);

/// Standalone learnable-filter forecaster: normalize -> filter module ->
/// flatten -> linear readout -> denormalize. Parameters are shared by all nodes.
class FilterPredictor {
 public:
  struct Shape {
    std::size_t history = kDefaultHistory;
    std::size_t horizon = kDefaultHorizon;
    std::size_t features = 1;
    std::size_t width = 4;
  };

  /// Identity-initialized: the untrained predictor reproduces copy_last_step.
  /// Lift channels beyond the input features get small seeded random weights
  /// (their readout weights are zero, so the output is unaffected). Requires
  /// width >= features.
  FilterPredictor(Shape shape, NormStats stats, std::uint64_t seed = 0);
  /// Assembles a predictor from explicit parts, validating every shape.
  FilterPredictor(FilterModule filter, PointwiseLinear readout, NormStats stats,
                  std::size_t horizon);

  const Shape& shape() const { return shape_; }
  const NormStats& stats() const { return stats_; }
  const FilterModule& filter() const { return filter_; }
  const PointwiseLinear& readout() const { return readout_; }

  /// Forecast in data units for a raw (H x F) history. Does not touch caches.
  Matrix predict(const Matrix& history) const;
  Forecaster as_forecaster() const;

  /// Training path on normalized data: (H x F) -> (horizon x F), caching
  /// activations for backward().
  Matrix forward_normalized(const Matrix& normalized_history);
  /// Accumulates parameter gradients; returns dL/d(normalized history).
  Matrix backward(const Matrix& grad_normalized_forecast);

  void zero_gradients();
  std::vector<ParamRef> params();

 private:
  void validate() const;
  Matrix flatten(const Matrix& filtered) const;
  Matrix unflatten(const Matrix& row) const;

  Shape shape_;
  NormStats stats_;
  FilterModule filter_;
  PointwiseLinear readout_;
  Matrix cached_flat_;
};

struct EvaluationOptions {
  std::size_t history = kDefaultHistory;
  std::size_t horizon = kDefaultHorizon;
  std::size_t stride = 1;
  /// Rolling mode: horizon step i is forecast from the history window ending
  /// at the true observation just before it (one step ahead each time).
  bool rolling = false;
  double mape_epsilon = kDefaultMapeEpsilon;
};

struct EvaluationResult {
  std::vector<MetricsReport> per_step;  // index 0 is horizon step 1
  MetricsReport aggregate;
  std::size_t n_windows = 0;

  std::vector<MetricsRow> rows() const;
};

struct ForecastRecord {
  std::size_t node = 0;
  std::size_t target_index = 0;  // time index of the forecast step in the series
  std::size_t horizon_step = 0;  // 1-based
  double predicted = 0.0;
  double actual = 0.0;
};

/// Number of evaluation windows for a series of `n_steps`.
std::size_t count_windows(std::size_t n_steps, const EvaluationOptions& opts);

/// Slides (history, horizon) windows over the whole series and scores the
/// forecaster per horizon step and in aggregate. Windows and nodes are
/// visited in a fixed order, so results are reproducible.
EvaluationResult rolling_evaluate(const Forecaster& forecaster, const TimeSeriesTensor& series,
                                  const EvaluationOptions& opts);

/// Same traversal as rolling_evaluate, returning every individual forecast.
std::vector<ForecastRecord> collect_forecasts(const Forecaster& forecaster,
                                              const TimeSeriesTensor& series,
                                              const EvaluationOptions& opts);

}  // namespace lfm
