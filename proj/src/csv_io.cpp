#include "lfm/csv_io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "lfm/error.hpp"

namespace lfm {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool parse_int(const std::string& s, std::int64_t& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

int two_digits(const std::string& s, std::size_t pos) {
  if (pos + 2 > s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])) ||
      !std::isdigit(static_cast<unsigned char>(s[pos + 1]))) {
    return -1;
  }
  return (s[pos] - '0') * 10 + (s[pos + 1] - '0');
}

}  // namespace

bool parse_iso8601(const std::string& text, std::int64_t& seconds, char& separator) {
  using namespace std::chrono;
  std::string s = text;
  if (!s.empty() && s.back() == 'Z') s.pop_back();
  if (s.size() != 19 || s[4] != '-' || s[7] != '-' || s[13] != ':' || s[16] != ':') return false;
  if (s[10] != 'T' && s[10] != ' ') return false;
  std::int64_t yr = 0;
  if (!parse_int(s.substr(0, 4), yr)) return false;
  const int mo = two_digits(s, 5), dy = two_digits(s, 8);
  const int hh = two_digits(s, 11), mm = two_digits(s, 14), ss = two_digits(s, 17);
  if (mo < 0 || dy < 0 || hh < 0 || mm < 0 || ss < 0 || hh > 23 || mm > 59 || ss > 59) {
    return false;
  }
  const year_month_day ymd{year{static_cast<int>(yr)}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(dy)}};
  if (!ymd.ok()) return false;
  const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  seconds = static_cast<std::int64_t>(days_since_epoch) * 86400 + hh * 3600 + mm * 60 + ss;
  separator = s[10];
  return true;
}

std::string TimeAxis::format(std::size_t index) const {
  const std::int64_t value = origin + static_cast<std::int64_t>(index) * step;
  if (style == TimestampStyle::index) return std::to_string(value);
  using namespace std::chrono;
  const std::int64_t day_count = (value >= 0 ? value : value - 86399) / 86400;
  const std::int64_t secs = value - day_count * 86400;
  const year_month_day ymd{sys_days{days{day_count}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u%c%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                date_time_separator, static_cast<int>(secs / 3600),
                static_cast<int>(secs / 60 % 60), static_cast<int>(secs % 60));
  return buf;
}

CsvSeries read_csv(std::istream& in, long index_interval_seconds) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("line 1: CSV is empty, expected a header row");
  const auto header = split_fields(line);
  if (header.size() < 2) {
    throw ParseError("line 1: header needs a timestamp column and at least one node column");
  }
  std::vector<std::string> node_ids;
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string id = trim(header[c]);
    if (id.empty()) throw ParseError(detail::concat("line 1, column ", c + 1, ": empty node id"));
    node_ids.push_back(std::move(id));
  }
  const std::size_t n_nodes = node_ids.size();

  std::vector<std::vector<double>> columns(n_nodes);
  std::vector<std::int64_t> stamps;
  TimeAxis axis;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError(detail::concat("line ", line_no, ": expected ", header.size(),
                                      " fields, found ", fields.size()));
    }
    const std::string ts = trim(fields[0]);
    std::int64_t stamp = 0;
    char sep = 'T';
    if (stamps.empty()) {
      if (parse_int(ts, stamp)) {
        axis.style = TimestampStyle::index;
      } else if (parse_iso8601(ts, stamp, sep)) {
        axis.style = TimestampStyle::iso8601;
        axis.date_time_separator = sep;
      } else {
        throw ParseError(detail::concat("line ", line_no, ", column 1: timestamp '", ts,
                                        "' is neither an integer index nor ISO-8601"));
      }
    } else {
      const bool ok = axis.style == TimestampStyle::index ? parse_int(ts, stamp)
                                                          : parse_iso8601(ts, stamp, sep);
      if (!ok) {
        throw ParseError(detail::concat("line ", line_no, ", column 1: timestamp '", ts,
                                        "' does not match the format of the first row"));
      }
      const std::int64_t step = stamp - stamps.back();
      if (step <= 0) {
        throw ParseError(detail::concat("line ", line_no, ", column 1: timestamp '", ts,
                                        "' is not strictly increasing"));
      }
      if (stamps.size() >= 2 && step != stamps[1] - stamps[0]) {
        throw ParseError(detail::concat("line ", line_no, ", column 1: gap or irregular spacing (",
                                        step, " vs ", stamps[1] - stamps[0], ")"));
      }
    }
    stamps.push_back(stamp);
    for (std::size_t c = 0; c < n_nodes; ++c) {
      const std::string cell = trim(fields[c + 1]);
      if (cell.empty()) {
        throw ParseError(detail::concat("line ", line_no, ", column ", c + 2, " (node '",
                                        node_ids[c], "'): missing value"));
      }
      double v = 0.0;
      if (!parse_double(cell, v)) {
        throw ParseError(detail::concat("line ", line_no, ", column ", c + 2, " (node '",
                                        node_ids[c], "'): '", cell, "' is not a number"));
      }
      if (!std::isfinite(v)) {
        throw ParseError(detail::concat("line ", line_no, ", column ", c + 2, " (node '",
                                        node_ids[c], "'): non-finite value '", cell, "'"));
      }
      columns[c].push_back(v);
    }
  }
  if (stamps.empty()) throw ParseError("CSV has a header but no data rows");

  axis.origin = stamps.front();
  axis.step = stamps.size() >= 2 ? stamps[1] - stamps[0] : 1;
  long interval = index_interval_seconds;
  if (axis.style == TimestampStyle::iso8601) {
    interval = stamps.size() >= 2 ? static_cast<long>(axis.step) : index_interval_seconds;
    if (stamps.size() < 2) axis.step = index_interval_seconds;
  }

  std::vector<double> values;
  values.reserve(n_nodes * stamps.size());
  for (auto& col : columns) values.insert(values.end(), col.begin(), col.end());
  try {
    return CsvSeries{TimeSeriesTensor(n_nodes, stamps.size(), 1, std::move(values),
                                      std::move(node_ids), interval),
                     axis};
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("line 1: ") + e.what());
  }
}

CsvSeries load_csv(const std::filesystem::path& path, long index_interval_seconds) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  try {
    return read_csv(in, index_interval_seconds);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_csv(std::ostream& out, const TimeSeriesTensor& series, const TimeAxis& axis) {
  if (series.n_features() != 1) {
    throw InvalidArgument(detail::concat("wide CSV holds one feature, series has ",
                                         series.n_features()));
  }
  out << "timestamp";
  for (const auto& id : series.node_ids()) out << ',' << id;
  out << '\n';
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (std::size_t t = 0; t < series.n_steps(); ++t) {
    out << axis.format(t);
    for (std::size_t n = 0; n < series.n_nodes(); ++n) out << ',' << series.at(n, t, 0);
    out << '\n';
  }
  out.precision(precision);
}

void save_csv(const std::filesystem::path& path, const TimeSeriesTensor& series,
              const TimeAxis& axis) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_csv(out, series, axis);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

void write_forecast_csv(std::ostream& out, std::span<const ForecastRecord> records,
                        const std::vector<std::string>& node_ids, const TimeAxis& axis) {
  const auto precision = out.precision();
  out << "timestamp,node_id,horizon_step,predicted,actual\n" << std::setprecision(17);
  for (const auto& r : records) {
    if (r.node >= node_ids.size()) throw ShapeError("forecast record refers to an unknown node");
    out << axis.format(r.target_index) << ',' << node_ids[r.node] << ',' << r.horizon_step << ','
        << r.predicted << ',' << r.actual << '\n';
  }
  out.precision(precision);
}

std::vector<ForecastRow> read_forecast_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("line 1: forecast CSV is empty");
  const auto header = split_fields(line);
  const std::vector<std::string> expected{"timestamp", "node_id", "horizon_step", "predicted",
                                          "actual"};
  if (header.size() != expected.size()) {
    throw ParseError("line 1: forecast header must be timestamp,node_id,horizon_step,predicted,actual");
  }
  for (std::size_t c = 0; c < expected.size(); ++c) {
    if (trim(header[c]) != expected[c]) {
      throw ParseError(detail::concat("line 1, column ", c + 1, ": expected '", expected[c],
                                      "', found '", header[c], "'"));
    }
  }
  std::vector<ForecastRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != expected.size()) {
      throw ParseError(detail::concat("line ", line_no, ": expected 5 fields, found ", f.size()));
    }
    ForecastRow row;
    row.timestamp = trim(f[0]);
    row.node_id = trim(f[1]);
    std::int64_t step = 0;
    if (!parse_int(trim(f[2]), step) || step < 1) {
      throw ParseError(detail::concat("line ", line_no, ", column 3: bad horizon step '", f[2], "'"));
    }
    row.horizon_step = static_cast<std::size_t>(step);
    if (!parse_double(trim(f[3]), row.predicted) || !std::isfinite(row.predicted)) {
      throw ParseError(detail::concat("line ", line_no, ", column 4: bad number '", f[3], "'"));
    }
    if (!parse_double(trim(f[4]), row.actual) || !std::isfinite(row.actual)) {
      throw ParseError(detail::concat("line ", line_no, ", column 5: bad number '", f[4], "'"));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<MetricsRow> metrics_from_forecasts(std::span<const ForecastRow> rows,
                                               double mape_epsilon) {
  std::map<std::size_t, MetricsAccumulator> per_step;
  MetricsAccumulator all(mape_epsilon);
  for (const auto& r : rows) {
    per_step.try_emplace(r.horizon_step, mape_epsilon).first->second.add(r.predicted, r.actual);
    all.add(r.predicted, r.actual);
  }
  std::vector<MetricsRow> out;
  for (const auto& [step, acc] : per_step) out.push_back({std::to_string(step), acc.report()});
  out.push_back({"all", all.report()});
  return out;
}

}  // namespace lfm
