#include "lfm/training.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace lfm {

const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

// WindowedDataset ------------------------------------------------------------

WindowedDataset::WindowedDataset(std::shared_ptr<const TimeSeriesTensor> series,
                                 std::size_t history, std::size_t horizon,
                                 std::array<TimeRange, 3> ranges, std::uint64_t rng_seed)
    : series_(std::move(series)),
      history_(history),
      horizon_(horizon),
      ranges_(ranges),
      rng_seed_(rng_seed) {
  if (!series_) throw InvalidArgument("windowed dataset needs a series");
  if (history_ == 0 || horizon_ == 0) throw InvalidArgument("history and horizon must be >= 1");
  const std::size_t span = history_ + horizon_;
  for (std::size_t s = 0; s < 3; ++s) {
    const TimeRange& r = ranges_[s];
    if (r.end() > series_->n_steps()) {
      throw ShapeError(detail::concat(to_string(static_cast<Split>(s)), " range ends at ",
                                      r.end(), " beyond ", series_->n_steps(), " steps"));
    }
    if (r.length < span) continue;
    for (std::size_t start = r.start; start + span <= r.end(); ++start) starts_[s].push_back(start);
  }
}

Matrix WindowedDataset::history_window(std::size_t start, std::size_t node) const {
  return series_->window(node, start, history_);
}

Matrix WindowedDataset::target_window(std::size_t start, std::size_t node) const {
  return series_->window(node, start + history_, horizon_);
}

TimeSeriesTensor WindowedDataset::split_series(Split s) const {
  const TimeRange& r = range(s);
  return slice_window(*series_, r.start, r.length);
}

WindowedDataset make_windows(std::shared_ptr<const TimeSeriesTensor> series, std::size_t history,
                             std::size_t horizon, SplitRatios ratios, std::uint64_t rng_seed) {
  if (!series) throw InvalidArgument("make_windows needs a series");
  const std::array<double, 3> r{ratios.train, ratios.val, ratios.test};
  for (std::size_t s = 0; s < 3; ++s) {
    if (!(r[s] >= 0.0) || !std::isfinite(r[s])) {
      throw InvalidArgument(detail::concat("split ratio for ", to_string(static_cast<Split>(s)),
                                           " must be >= 0, got ", r[s]));
    }
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw InvalidArgument(
        detail::concat("split ratios must sum to 1, got ", r[0] + r[1] + r[2]));
  }
  if (history == 0 || horizon == 0) throw InvalidArgument("history and horizon must be >= 1");

  const std::size_t total = series->n_steps();
  const std::size_t span = history + horizon;
  auto boundary = [&](double fraction) {
    const auto b = static_cast<std::size_t>(std::llround(static_cast<double>(total) * fraction));
    return std::min(b, total);
  };
  const std::size_t train_end = boundary(r[0]);
  const std::size_t val_end = std::max(train_end, boundary(r[0] + r[1]));
  const std::array<TimeRange, 3> ranges{TimeRange{0, train_end},
                                        TimeRange{train_end, val_end - train_end},
                                        TimeRange{val_end, total - val_end}};

  std::size_t min_required = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    if (r[s] > 0.0) {
      min_required = std::max(
          min_required, static_cast<std::size_t>(std::ceil(static_cast<double>(span) / r[s])));
    }
  }
  for (std::size_t s = 0; s < 3; ++s) {
    if (r[s] > 0.0 && ranges[s].length < span) {
      throw ShapeError(detail::concat(
          "series of ", total, " steps is too short: the ", to_string(static_cast<Split>(s)),
          " split gets ", ranges[s].length, " steps but one window needs ", span,
          "; at least ", min_required, " steps are required"));
    }
  }
  return WindowedDataset(std::move(series), history, horizon, ranges, rng_seed);
}

// Loss -----------------------------------------------------------------------

LossResult mae_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw ShapeError(detail::concat("mae_loss shape mismatch: ", pred.size(), " vs ",
                                    target.size()));
  }
  if (pred.empty()) throw InvalidArgument("mae_loss on empty input");
  LossResult out;
  out.grad.resize(pred.size());
  const double inv = 1.0 / static_cast<double>(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    sum += std::abs(diff);
    out.grad[i] = diff > 0.0 ? inv : (diff < 0.0 ? -inv : 0.0);
  }
  out.loss = sum * inv;
  return out;
}

// Optimizers -----------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument(detail::concat("learning rate must be >= 0, got ", learning_rate));
  }
  if (epochs == 0) throw InvalidArgument("epochs must be >= 1");
  if (batch_size == 0) throw InvalidArgument("batch size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InvalidArgument("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw InvalidArgument("Adam epsilon must be positive");
  if (early_stop_patience && *early_stop_patience == 0) {
    throw InvalidArgument("early stopping patience must be >= 1");
  }
}

namespace {

void check_grads(std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size()) {
    throw ShapeError(detail::concat("parameter block has ", params.size(), " entries, gradient ",
                                    grads.size()));
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw InvalidArgument(detail::concat("non-finite gradient at index ", i));
    }
  }
}

void rezero(std::span<double> params, std::span<const std::size_t> pinned) {
  for (std::size_t i : pinned) params[i] = 0.0;
}

}  // namespace

void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& moments,
               std::size_t step, const TrainConfig& cfg, std::span<const std::size_t> pinned) {
  check_grads(params, grads);
  if (step == 0) throw InvalidArgument("Adam step counter starts at 1");
  if (moments.first.empty() && moments.second.empty()) {
    moments.first.assign(params.size(), 0.0);
    moments.second.assign(params.size(), 0.0);
  }
  if (moments.first.size() != params.size() || moments.second.size() != params.size()) {
    throw ShapeError("Adam moment buffers do not match the parameter block");
  }
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    moments.first[i] = cfg.beta1 * moments.first[i] + (1.0 - cfg.beta1) * g;
    moments.second[i] = cfg.beta2 * moments.second[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = moments.first[i] / c1;
    const double v_hat = moments.second[i] / c2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
  rezero(params, pinned);
}

void sgd_step(std::span<double> params, std::span<const double> grads, double learning_rate,
              std::span<const std::size_t> pinned) {
  check_grads(params, grads);
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= learning_rate * grads[i];
  rezero(params, pinned);
}

Optimizer::Optimizer(const TrainConfig& cfg, const std::vector<ParamRef>& params)
    : cfg_(cfg), moments_(params.size()) {
  cfg_.validate();
}

void Optimizer::step(std::vector<ParamRef>& params) {
  if (params.size() != moments_.size()) {
    throw ShapeError("optimizer was built for a different parameter list");
  }
  ++step_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    if (cfg_.optimizer == OptimizerKind::adam) {
      adam_step(p.value, p.grad, moments_[i], step_, cfg_, p.pinned);
    } else {
      sgd_step(p.value, p.grad, cfg_.learning_rate, p.pinned);
    }
  }
}

// Log I/O --------------------------------------------------------------------

void write_training_log(std::ostream& os, const TrainingLog& log) {
  const auto precision = os.precision();
  os << "# epoch train_loss val_loss\n" << std::setprecision(17);
  for (const auto& e : log.epochs) os << e.epoch << ' ' << e.train_loss << ' ' << e.val_loss << '\n';
  os.precision(precision);
}

TrainingLog read_training_log(std::istream& is) {
  TrainingLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    EpochRecord rec;
    std::string train, val;
    if (!(ls >> rec.epoch >> train >> val)) {
      throw ParseError(detail::concat("training log line ", line_no, ": expected 3 fields"));
    }
    try {
      rec.train_loss = std::stod(train);
      rec.val_loss = std::stod(val);
    } catch (const std::exception&) {
      throw ParseError(detail::concat("training log line ", line_no, ": bad number"));
    }
    log.epochs.push_back(rec);
  }
  return log;
}

// Training -------------------------------------------------------------------

TrainingDiverged::TrainingDiverged(std::size_t epoch, std::size_t batch, double loss)
    : Error(detail::concat("training diverged at epoch ", epoch, ", batch ", batch,
                           ": loss is ", loss)),
      epoch_(epoch),
      batch_(batch) {}

double evaluate_split(const FilterPredictor& predictor, const WindowedDataset& data, Split s) {
  const auto& starts = data.starts(s);
  if (starts.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t start : starts) {
    for (std::size_t node = 0; node < data.series().n_nodes(); ++node) {
      const Matrix pred = predictor.predict(data.history_window(start, node));
      const Matrix target = data.target_window(start, node);
      for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred.flat()[i] - target.flat()[i]);
      count += pred.size();
    }
  }
  return sum / static_cast<double>(count);
}

TrainingLog train(FilterPredictor& predictor, const WindowedDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  const auto& train_starts = data.starts(Split::train);
  if (train_starts.empty()) throw InvalidArgument("training split has no windows");
  if (data.history() != predictor.shape().history || data.horizon() != predictor.shape().horizon ||
      data.series().n_features() != predictor.shape().features) {
    throw ShapeError(detail::concat(
        "dataset windows (H=", data.history(), ", T=", data.horizon(), ", F=",
        data.series().n_features(), ") do not match predictor (H=", predictor.shape().history,
        ", T=", predictor.shape().horizon, ", F=", predictor.shape().features, ")"));
  }

  const std::size_t n_nodes = data.series().n_nodes();
  std::vector<std::pair<std::size_t, std::size_t>> samples;
  samples.reserve(train_starts.size() * n_nodes);
  for (std::size_t start : train_starts) {
    for (std::size_t node = 0; node < n_nodes; ++node) samples.emplace_back(start, node);
  }

  auto params = predictor.params();
  Optimizer optimizer(cfg, params);
  const NormStats& stats = predictor.stats();
  const bool has_val = data.size(Split::val) > 0;

  auto snapshot = [&] {
    std::vector<std::vector<double>> copy;
    for (const auto& p : params) copy.emplace_back(p.value.begin(), p.value.end());
    return copy;
  };

  TrainingLog log;
  log.epochs.push_back({0, evaluate_split(predictor, data, Split::train),
                        evaluate_split(predictor, data, Split::val)});
  double best_val = log.epochs.back().val_loss;
  auto best_params = snapshot();
  std::size_t since_best = 0;

  std::mt19937_64 rng(cfg.seed);
  predictor.zero_gradients();
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(samples.begin(), samples.end(), rng);
    double abs_sum = 0.0;
    std::size_t abs_count = 0;
    std::size_t batch = 0;
    for (std::size_t first = 0; first < samples.size(); first += cfg.batch_size, ++batch) {
      const std::size_t last = std::min(first + cfg.batch_size, samples.size());
      const double inv_batch = 1.0 / static_cast<double>(last - first);
      for (std::size_t i = first; i < last; ++i) {
        const auto [start, node] = samples[i];
        const Matrix history = stats.apply(data.history_window(start, node));
        const Matrix target = stats.apply(data.target_window(start, node));
        const Matrix pred = predictor.forward_normalized(history);
        LossResult loss = mae_loss(pred.flat(), target.flat());
        if (!std::isfinite(loss.loss)) throw TrainingDiverged(epoch, batch, loss.loss);
        for (std::size_t r = 0; r < pred.rows(); ++r) {
          for (std::size_t f = 0; f < pred.cols(); ++f) {
            abs_sum += std::abs(pred(r, f) - target(r, f)) * stats.std()[f];
          }
        }
        abs_count += pred.size();
        for (double& g : loss.grad) g *= inv_batch;
        predictor.backward(Matrix(pred.rows(), pred.cols(), std::move(loss.grad)));
      }
      optimizer.step(params);
      predictor.zero_gradients();
    }

    EpochRecord rec{epoch, abs_sum / static_cast<double>(abs_count),
                    evaluate_split(predictor, data, Split::val)};
    if (!std::isfinite(rec.train_loss)) throw TrainingDiverged(epoch, batch, rec.train_loss);
    log.epochs.push_back(rec);

    if (!has_val) continue;
    if (rec.val_loss < best_val) {
      best_val = rec.val_loss;
      best_params = snapshot();
      log.best_epoch = epoch;
      since_best = 0;
    } else if (cfg.early_stop_patience && ++since_best >= *cfg.early_stop_patience) {
      log.early_stopped = true;
      for (std::size_t i = 0; i < params.size(); ++i) {
        std::copy(best_params[i].begin(), best_params[i].end(), params[i].value.begin());
      }
      break;
    }
  }
  if (!has_val) log.best_epoch = log.epochs.back().epoch;
  return log;
}

}  // namespace lfm
