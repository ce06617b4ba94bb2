#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lfm/metrics.hpp"
#include "lfm/predictors.hpp"
#include "lfm/tensor.hpp"

namespace lfm {

enum class TimestampStyle { index, iso8601 };

/// Equally spaced timestamps: integer indices, or ISO-8601 date-times in UTC
/// seconds since the epoch.
struct TimeAxis {
  TimestampStyle style = TimestampStyle::index;
  std::int64_t origin = 0;
  std::int64_t step = 1;
  char date_time_separator = 'T';

  std::string format(std::size_t index) const;
};

struct CsvSeries {
  TimeSeriesTensor tensor;
  TimeAxis axis;
};

/// Wide CSV: header `timestamp,<node_id>,...`, one row per interval.
/// Integer timestamps take their interval from `index_interval_seconds`;
/// ISO-8601 timestamps define it. Produces a single-feature tensor.
/// Errors carry 1-based line and column numbers.
CsvSeries read_csv(std::istream& in, long index_interval_seconds = 300);
CsvSeries load_csv(const std::filesystem::path& path, long index_interval_seconds = 300);

void write_csv(std::ostream& out, const TimeSeriesTensor& series, const TimeAxis& axis);
void save_csv(const std::filesystem::path& path, const TimeSeriesTensor& series,
              const TimeAxis& axis);

/// Parses `YYYY-MM-DD[T ]HH:MM:SS[Z]` to seconds since the epoch.
/// Returns false if the text is not in that form.
bool parse_iso8601(const std::string& text, std::int64_t& seconds, char& separator);

/// Row of the forecast CSV `timestamp,node_id,horizon_step,predicted,actual`.
struct ForecastRow {
  std::string timestamp;
  std::string node_id;
  std::size_t horizon_step = 0;
  double predicted = 0.0;
  double actual = 0.0;
};

void write_forecast_csv(std::ostream& out, std::span<const ForecastRecord> records,
                        const std::vector<std::string>& node_ids, const TimeAxis& axis);
std::vector<ForecastRow> read_forecast_csv(std::istream& in);

/// Per-horizon-step metrics (ascending step) plus an "all" row.
std::vector<MetricsRow> metrics_from_forecasts(std::span<const ForecastRow> rows,
                                               double mape_epsilon);

}  // namespace lfm
