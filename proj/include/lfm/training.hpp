#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lfm/error.hpp"
#include "lfm/filters.hpp"
#include "lfm/normalization.hpp"
#include "lfm/predictors.hpp"
#include "lfm/tensor.hpp"

namespace lfm {

enum class Split { train = 0, val = 1, test = 2 };

const char* to_string(Split s);

struct SplitRatios {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
};

/// Sliding (history, horizon) windows over a series, cut with stride 1 inside
/// chronological train/val/test ranges. A window never crosses a range edge.
class WindowedDataset {
 public:
  WindowedDataset(std::shared_ptr<const TimeSeriesTensor> series, std::size_t history,
                  std::size_t horizon, std::array<TimeRange, 3> ranges, std::uint64_t rng_seed);

  const TimeSeriesTensor& series() const { return *series_; }
  std::size_t history() const { return history_; }
  std::size_t horizon() const { return horizon_; }
  std::uint64_t rng_seed() const { return rng_seed_; }

  const TimeRange& range(Split s) const { return ranges_[static_cast<int>(s)]; }
  /// Absolute start indices of the history windows in split `s`.
  const std::vector<std::size_t>& starts(Split s) const { return starts_[static_cast<int>(s)]; }
  std::size_t size(Split s) const { return starts(s).size(); }

  /// (H x F) history of one node for the window starting at `start`.
  Matrix history_window(std::size_t start, std::size_t node) const;
  /// (T x F) target block immediately following that history.
  Matrix target_window(std::size_t start, std::size_t node) const;

  /// Series restricted to one split's range.
  TimeSeriesTensor split_series(Split s) const;

 private:
  std::shared_ptr<const TimeSeriesTensor> series_;
  std::size_t history_;
  std::size_t horizon_;
  std::array<TimeRange, 3> ranges_;
  std::array<std::vector<std::size_t>, 3> starts_;
  std::uint64_t rng_seed_;
};

/// Chronological split (train earliest). Ratios must be non-negative and sum
/// to 1 within 1e-9; every split with a positive ratio needs at least one window.
WindowedDataset make_windows(std::shared_ptr<const TimeSeriesTensor> series, std::size_t history,
                             std::size_t horizon, SplitRatios ratios = {},
                             std::uint64_t rng_seed = 0);

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;
};

/// mean |pred - target| and its subgradient sign(pred - target) / count, with sign(0) = 0.
LossResult mae_loss(std::span<const double> pred, std::span<const double> target);

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 42;
  std::optional<std::size_t> early_stop_patience;

  void validate() const;
};

/// First and second moment estimates for one parameter block.
struct AdamMoments {
  std::vector<double> first;
  std::vector<double> second;
};

/// Bias-corrected Adam update for step `step` (1-based). Entries listed in
/// `pinned` are reset to exactly zero afterwards. Throws on non-finite grads.
void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& moments,
               std::size_t step, const TrainConfig& cfg,
               std::span<const std::size_t> pinned = {});

/// params -= lr * grads, with the same pinning and finiteness rules.
void sgd_step(std::span<double> params, std::span<const double> grads, double learning_rate,
              std::span<const std::size_t> pinned = {});

/// Applies the configured optimizer to a fixed list of parameter blocks.
class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, const std::vector<ParamRef>& params);
  void step(std::vector<ParamRef>& params);
  std::size_t steps_taken() const { return step_; }

 private:
  TrainConfig cfg_;
  std::vector<AdamMoments> moments_;
  std::size_t step_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 0 is the untrained model
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN when the validation split is empty
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  bool early_stopped = false;
  std::size_t best_epoch = 0;
};

/// Line-oriented record: a `# epoch train_loss val_loss` header, then one
/// whitespace-separated line per epoch.
void write_training_log(std::ostream& os, const TrainingLog& log);
TrainingLog read_training_log(std::istream& is);

/// Raised when a loss turns NaN or infinite.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(std::size_t epoch, std::size_t batch, double loss);
  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

/// Mean absolute error in data units of one-shot forecasts over split `s`.
double evaluate_split(const FilterPredictor& predictor, const WindowedDataset& data, Split s);

/// Minibatch training on normalized MAE. Samples are (window, node) pairs of
/// the train split, reshuffled every epoch from cfg.seed. Losses in the log
/// are MAE in data units. If early stopping triggers, the parameters of the
/// best validation epoch are restored.
TrainingLog train(FilterPredictor& predictor, const WindowedDataset& data, const TrainConfig& cfg);

}  // namespace lfm
