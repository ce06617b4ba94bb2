#include "lfm/predictors.hpp"

#include <random>
#include <string>

#include "lfm/error.hpp"

namespace lfm {

Matrix copy_last_step(const Matrix& history, std::size_t horizon) {
  if (history.rows() == 0 || history.cols() == 0) {
    throw InvalidArgument("copy_last_step needs a non-empty history");
  }
  if (horizon == 0) throw InvalidArgument("forecast horizon must be >= 1");
  Matrix out(horizon, history.cols());
  const auto last = history.row(history.rows() - 1);
  for (std::size_t t = 0; t < horizon; ++t) std::copy(last.begin(), last.end(), out.row(t).begin());
  return out;
}

Matrix filtered_copy_last_step(const Matrix& history, std::size_t horizon, std::size_t window) {
  if (history.rows() == 0 || history.cols() == 0) {
    throw InvalidArgument("filtered_copy_last_step needs a non-empty history");
  }
  Matrix blended(history.rows(), history.cols());
  for (std::size_t f = 0; f < history.cols(); ++f) {
    const auto raw = history.column(f);
    blended.set_column(f, blend_with_original(raw, moving_average(raw, window)));
  }
  return copy_last_step(blended, horizon);
}

// FilterPredictor ------------------------------------------------------------

FilterPredictor::FilterPredictor(Shape shape, NormStats stats, std::uint64_t seed)
    : shape_(shape), stats_(std::move(stats)) {
  if (shape_.history == 0 || shape_.horizon == 0 || shape_.features == 0 || shape_.width == 0) {
    throw InvalidArgument("filter predictor dimensions must all be >= 1");
  }
  if (shape_.width < shape_.features) {
    throw InvalidArgument(detail::concat("filter width ", shape_.width,
                                         " is smaller than the feature count ", shape_.features,
                                         "; identity initialization needs width >= features"));
  }
  PointwiseLinear lift = PointwiseLinear::identity(shape_.features, shape_.width);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> init(0.0, 1.0 / std::sqrt(static_cast<double>(shape_.features)));
  for (std::size_t i = 0; i < shape_.features; ++i) {
    for (std::size_t j = shape_.features; j < shape_.width; ++j) lift.weight()(i, j) = init(rng);
  }
  filter_ = FilterModule(shape_.history, std::move(lift));

  const std::size_t in = shape_.history * shape_.width;
  const std::size_t out = shape_.horizon * shape_.features;
  Matrix w(in, out);
  for (std::size_t step = 0; step < shape_.horizon; ++step) {
    for (std::size_t f = 0; f < shape_.features; ++f) {
      w((shape_.history - 1) * shape_.width + f, step * shape_.features + f) = 1.0;
    }
  }
  readout_ = PointwiseLinear(std::move(w), std::vector<double>(out, 0.0));
  validate();
}

FilterPredictor::FilterPredictor(FilterModule filter, PointwiseLinear readout, NormStats stats,
                                 std::size_t horizon)
    : stats_(std::move(stats)), filter_(std::move(filter)), readout_(std::move(readout)) {
  shape_.history = filter_.window_length();
  shape_.horizon = horizon;
  shape_.features = filter_.in_features();
  shape_.width = filter_.width();
  validate();
}

void FilterPredictor::validate() const {
  if (readout_.in_features() != shape_.history * shape_.width) {
    throw ShapeError(detail::concat("readout input width ", readout_.in_features(),
                                    " != history*width = ", shape_.history * shape_.width));
  }
  if (readout_.out_features() != shape_.horizon * shape_.features) {
    throw ShapeError(detail::concat("readout output width ", readout_.out_features(),
                                    " != horizon*features = ", shape_.horizon * shape_.features));
  }
  if (stats_.fitted() && stats_.n_features() != shape_.features) {
    throw ShapeError(detail::concat("normalization covers ", stats_.n_features(),
                                    " features, predictor expects ", shape_.features));
  }
}

Matrix FilterPredictor::flatten(const Matrix& filtered) const {
  return Matrix(1, filtered.size(), std::vector<double>(filtered.flat().begin(), filtered.flat().end()));
}

Matrix FilterPredictor::unflatten(const Matrix& row) const {
  return Matrix(shape_.horizon, shape_.features,
                std::vector<double>(row.flat().begin(), row.flat().end()));
}

Matrix FilterPredictor::predict(const Matrix& history) const {
  if (!stats_.fitted()) throw Error("filter predictor normalization statistics are not fitted");
  if (history.rows() != shape_.history || history.cols() != shape_.features) {
    throw ShapeError(detail::concat("history is (", history.rows(), ", ", history.cols(),
                                    "), predictor expects (", shape_.history, ", ",
                                    shape_.features, ")"));
  }
  const Matrix filtered = filter_.infer(stats_.apply(history));
  return stats_.invert(unflatten(readout_.forward(flatten(filtered))));
}

Forecaster FilterPredictor::as_forecaster() const {
  return [this](const Matrix& history, std::size_t horizon) {
    if (horizon > shape_.horizon) {
      throw InvalidArgument(detail::concat("predictor was built for horizon ", shape_.horizon,
                                           ", asked for ", horizon));
    }
    Matrix full = predict(history);
    if (horizon == shape_.horizon) return full;
    Matrix out(horizon, full.cols());
    for (std::size_t t = 0; t < horizon; ++t) {
      std::copy(full.row(t).begin(), full.row(t).end(), out.row(t).begin());
    }
    return out;
  };
}

Matrix FilterPredictor::forward_normalized(const Matrix& normalized_history) {
  cached_flat_ = flatten(filter_.forward(normalized_history));
  return unflatten(readout_.forward(cached_flat_));
}

Matrix FilterPredictor::backward(const Matrix& grad_normalized_forecast) {
  if (cached_flat_.size() == 0) throw Error("predictor backward called without a forward pass");
  if (grad_normalized_forecast.rows() != shape_.horizon ||
      grad_normalized_forecast.cols() != shape_.features) {
    throw ShapeError(detail::concat("forecast gradient is (", grad_normalized_forecast.rows(),
                                    ", ", grad_normalized_forecast.cols(), "), expected (",
                                    shape_.horizon, ", ", shape_.features, ")"));
  }
  const Matrix grad_row(1, grad_normalized_forecast.size(),
                        std::vector<double>(grad_normalized_forecast.flat().begin(),
                                            grad_normalized_forecast.flat().end()));
  const Matrix grad_flat = readout_.backward(cached_flat_, grad_row);
  return filter_.backward(Matrix(shape_.history, shape_.width,
                          std::vector<double>(grad_flat.flat().begin(), grad_flat.flat().end())));
}

void FilterPredictor::zero_gradients() {
  filter_.zero_gradients();
  readout_.zero_gradients();
}

std::vector<ParamRef> FilterPredictor::params() {
  auto out = filter_.params();
  readout_.append_params(out, "readout");
  return out;
}

// Evaluation -----------------------------------------------------------------

namespace {

template <typename Visitor>
void for_each_forecast(const Forecaster& forecaster, const TimeSeriesTensor& series,
                       const EvaluationOptions& opts, Visitor&& visit) {
  const std::size_t n_windows = count_windows(series.n_steps(), opts);
  const std::size_t h = opts.history;
  for (std::size_t w = 0; w < n_windows; ++w) {
    const std::size_t start = w * opts.stride;
    for (std::size_t node = 0; node < series.n_nodes(); ++node) {
      const Matrix target = series.window(node, start + h, opts.horizon);
      Matrix forecast;
      if (opts.rolling) {
        forecast = Matrix(opts.horizon, series.n_features());
        for (std::size_t i = 0; i < opts.horizon; ++i) {
          const Matrix step = forecaster(series.window(node, start + i, h), 1);
          std::copy(step.row(0).begin(), step.row(0).end(), forecast.row(i).begin());
        }
      } else {
        forecast = forecaster(series.window(node, start, h), opts.horizon);
      }
      if (forecast.rows() != opts.horizon || forecast.cols() != series.n_features()) {
        throw ShapeError(detail::concat("forecaster returned (", forecast.rows(), ", ",
                                        forecast.cols(), "), expected (", opts.horizon, ", ",
                                        series.n_features(), ")"));
      }
      visit(node, start, forecast, target);
    }
  }
}

}  // namespace

std::vector<MetricsRow> EvaluationResult::rows() const {
  std::vector<MetricsRow> out;
  for (std::size_t i = 0; i < per_step.size(); ++i) out.push_back({std::to_string(i + 1), per_step[i]});
  out.push_back({"all", aggregate});
  return out;
}

std::size_t count_windows(std::size_t n_steps, const EvaluationOptions& opts) {
  if (opts.history == 0 || opts.horizon == 0) {
    throw InvalidArgument("history and horizon must be >= 1");
  }
  if (opts.stride == 0) throw InvalidArgument("evaluation stride must be >= 1");
  const std::size_t need = opts.history + opts.horizon;
  if (n_steps < need) {
    throw ShapeError(detail::concat("series has ", n_steps, " steps but history ", opts.history,
                                    " + horizon ", opts.horizon, " needs at least ", need));
  }
  return (n_steps - need) / opts.stride + 1;
}

EvaluationResult rolling_evaluate(const Forecaster& forecaster, const TimeSeriesTensor& series,
                                  const EvaluationOptions& opts) {
  std::vector<MetricsAccumulator> steps(opts.horizon, MetricsAccumulator(opts.mape_epsilon));
  MetricsAccumulator all(opts.mape_epsilon);
  for_each_forecast(forecaster, series, opts,
                    [&](std::size_t, std::size_t, const Matrix& forecast, const Matrix& target) {
                      for (std::size_t i = 0; i < opts.horizon; ++i) {
                        steps[i].add(forecast.row(i), target.row(i));
                        all.add(forecast.row(i), target.row(i));
                      }
                    });
  EvaluationResult result;
  result.n_windows = count_windows(series.n_steps(), opts);
  for (const auto& acc : steps) result.per_step.push_back(acc.report());
  result.aggregate = all.report();
  return result;
}

std::vector<ForecastRecord> collect_forecasts(const Forecaster& forecaster,
                                              const TimeSeriesTensor& series,
                                              const EvaluationOptions& opts) {
  if (series.n_features() != 1) {
    throw InvalidArgument("forecast records are defined for single-feature series");
  }
  std::vector<ForecastRecord> out;
  for_each_forecast(forecaster, series, opts,
                    [&](std::size_t node, std::size_t start, const Matrix& forecast,
                        const Matrix& target) {
                      for (std::size_t i = 0; i < opts.horizon; ++i) {
                        out.push_back({node, start + opts.history + i, i + 1, forecast(i, 0),
                                       target(i, 0)});
                      }
                    });
  return out;
}

}  // namespace lfm
