#include "lfm/normalization.hpp"

#include <cmath>

#include "lfm/error.hpp"

namespace lfm {

NormStats::NormStats(std::vector<double> mean, std::vector<double> std)
    : mean_(std::move(mean)), std_(std::move(std)) {
  if (mean_.size() != std_.size()) {
    throw ShapeError(detail::concat("normalization has ", mean_.size(), " means but ",
                                    std_.size(), " deviations"));
  }
  if (mean_.empty()) throw InvalidArgument("normalization needs at least one feature");
  for (std::size_t f = 0; f < std_.size(); ++f) {
    if (!std::isfinite(mean_[f])) {
      throw InvalidArgument(detail::concat("feature ", f, " has non-finite mean"));
    }
    if (!(std_[f] > 0.0) || !std::isfinite(std_[f])) {
      throw InvalidArgument(detail::concat("feature ", f, " has zero variance (std = ", std_[f],
                                           "); cannot normalize"));
    }
  }
}

void NormStats::check_width(const Matrix& window) const {
  if (!fitted()) throw Error("normalization statistics have not been fitted");
  if (window.cols() != n_features()) {
    throw ShapeError(detail::concat("window has ", window.cols(), " features, normalization has ",
                                    n_features()));
  }
}

Matrix NormStats::apply(const Matrix& window) const {
  check_width(window);
  Matrix out = window;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t f = 0; f < out.cols(); ++f) out(r, f) = apply(window(r, f), f);
  }
  return out;
}

Matrix NormStats::invert(const Matrix& window) const {
  check_width(window);
  Matrix out = window;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t f = 0; f < out.cols(); ++f) out(r, f) = invert(window(r, f), f);
  }
  return out;
}

NormStats fit_normalization(const TimeSeriesTensor& series, TimeRange train_range) {
  if (train_range.length == 0) throw InvalidArgument("normalization range is empty");
  if (train_range.end() > series.n_steps()) {
    throw ShapeError(detail::concat("normalization range [", train_range.start, ", ",
                                    train_range.end(), ") exceeds ", series.n_steps(), " steps"));
  }
  const std::size_t nf = series.n_features();
  std::vector<double> mean(nf, 0.0), stdev(nf, 0.0);
  const double count = static_cast<double>(series.n_nodes() * train_range.length);
  for (std::size_t f = 0; f < nf; ++f) {
    double sum = 0.0;
    for (std::size_t n = 0; n < series.n_nodes(); ++n) {
      for (double v : series.stream(n, f).subspan(train_range.start, train_range.length)) sum += v;
    }
    mean[f] = sum / count;
    double sq = 0.0;
    for (std::size_t n = 0; n < series.n_nodes(); ++n) {
      for (double v : series.stream(n, f).subspan(train_range.start, train_range.length)) {
        sq += (v - mean[f]) * (v - mean[f]);
      }
    }
    stdev[f] = std::sqrt(sq / count);
    if (!(stdev[f] > 0.0)) {
      throw InvalidArgument(detail::concat("feature ", f,
                                           " has zero variance over the training range"));
    }
  }
  return NormStats(std::move(mean), std::move(stdev));
}

}  // namespace lfm
