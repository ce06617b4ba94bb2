#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lfm {

inline constexpr double kDefaultMapeEpsilon = 1e-6;

/// MAE and RMSE cover every comparison. MAPE covers only entries with
/// |target| > epsilon; it is absent when no entry qualifies.
/// n_evaluated + n_masked is the total number of comparisons.
struct MetricsReport {
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> mape_percent;
  std::size_t n_evaluated = 0;
  std::size_t n_masked = 0;

  std::size_t n_total() const { return n_evaluated + n_masked; }
};

/// Streaming form of compute_metrics. Sums are accumulated in insertion order.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(double mask_epsilon = kDefaultMapeEpsilon);

  void add(double pred, double target);
  void add(std::span<const double> pred, std::span<const double> target);
  MetricsReport report() const;

 private:
  double mask_epsilon_;
  double abs_sum_ = 0.0;
  double sq_sum_ = 0.0;
  double pct_sum_ = 0.0;
  std::size_t count_ = 0;
  std::size_t pct_count_ = 0;
};

MetricsReport compute_metrics(std::span<const double> pred, std::span<const double> target,
                              double mask_epsilon = kDefaultMapeEpsilon);

/// One labelled row of a metrics table, e.g. a horizon step or "all".
struct MetricsRow {
  std::string label;
  MetricsReport report;
};

/// Aligned plain-text table.
void render_table(std::ostream& os, std::span<const MetricsRow> rows,
                  const std::string& label_header = "horizon_step");
/// CSV with header `horizon_step,mae,rmse,mape,n,n_masked`. Absent MAPE is an
/// empty field.
void render_csv(std::ostream& os, std::span<const MetricsRow> rows);

}  // namespace lfm
