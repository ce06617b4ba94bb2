#include "lfm/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "lfm/error.hpp"

namespace lfm {

MetricsAccumulator::MetricsAccumulator(double mask_epsilon) : mask_epsilon_(mask_epsilon) {
  if (!(mask_epsilon >= 0.0)) {
    throw InvalidArgument(detail::concat("mask_epsilon must be >= 0, got ", mask_epsilon));
  }
}

void MetricsAccumulator::add(double pred, double target) {
  const double err = pred - target;
  abs_sum_ += std::abs(err);
  sq_sum_ += err * err;
  ++count_;
  // Exact zeros are always excluded so no division by zero happens.
  if (std::abs(target) > mask_epsilon_ && target != 0.0) {
    pct_sum_ += std::abs(err / target);
    ++pct_count_;
  }
}

void MetricsAccumulator::add(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw ShapeError(detail::concat("metrics shape mismatch: ", pred.size(), " predictions vs ",
                                    target.size(), " targets"));
  }
  for (std::size_t i = 0; i < pred.size(); ++i) add(pred[i], target[i]);
}

MetricsReport MetricsAccumulator::report() const {
  MetricsReport r;
  r.n_evaluated = pct_count_;
  r.n_masked = count_ - pct_count_;
  if (count_ > 0) {
    r.mae = abs_sum_ / static_cast<double>(count_);
    r.rmse = std::sqrt(sq_sum_ / static_cast<double>(count_));
  }
  if (pct_count_ > 0) r.mape_percent = 100.0 * pct_sum_ / static_cast<double>(pct_count_);
  return r;
}

MetricsReport compute_metrics(std::span<const double> pred, std::span<const double> target,
                              double mask_epsilon) {
  MetricsAccumulator acc(mask_epsilon);
  acc.add(pred, target);
  return acc.report();
}

void render_table(std::ostream& os, std::span<const MetricsRow> rows,
                  const std::string& label_header) {
  std::size_t label_width = label_header.size();
  for (const auto& row : rows) label_width = std::max(label_width, row.label.size());
  const auto flags = os.flags();
  os << std::left << std::setw(static_cast<int>(label_width)) << label_header << std::right
     << std::setw(12) << "MAE" << std::setw(12) << "RMSE" << std::setw(12) << "MAPE(%)"
     << std::setw(10) << "n" << std::setw(10) << "masked" << '\n';
  for (const auto& row : rows) {
    const auto& r = row.report;
    os << std::left << std::setw(static_cast<int>(label_width)) << row.label << std::right
       << std::fixed << std::setprecision(4) << std::setw(12) << r.mae << std::setw(12) << r.rmse;
    if (r.mape_percent) {
      os << std::setw(12) << *r.mape_percent;
    } else {
      os << std::setw(12) << "-";
    }
    os << std::setw(10) << r.n_evaluated << std::setw(10) << r.n_masked << '\n';
  }
  os.flags(flags);
}

void render_csv(std::ostream& os, std::span<const MetricsRow> rows) {
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << "horizon_step,mae,rmse,mape,n,n_masked\n";
  os << std::setprecision(10);
  for (const auto& row : rows) {
    const auto& r = row.report;
    os << row.label << ',' << r.mae << ',' << r.rmse << ',';
    if (r.mape_percent) os << *r.mape_percent;
    os << ',' << r.n_evaluated << ',' << r.n_masked << '\n';
  }
  os.flags(flags);
  os.precision(precision);
}

}  // namespace lfm
