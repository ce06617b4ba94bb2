#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "lfm/checkpoint.hpp"
#include "lfm/csv_io.hpp"
#include "lfm/error.hpp"
#include "lfm/normalization.hpp"
#include "lfm/synthetic.hpp"
#include "oracles.hpp"

namespace lfm {
namespace {

std::string parse_error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    read_csv(in);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

TEST(CsvRead, WellFormedShape) {
  std::istringstream in("timestamp,a,b\n0,1.5,2\n1,3,4\n2,5,6.25\n");
  const auto s = read_csv(in);
  EXPECT_EQ(s.tensor.n_nodes(), 2u);
  EXPECT_EQ(s.tensor.n_steps(), 3u);
  EXPECT_EQ(s.tensor.n_features(), 1u);
  EXPECT_EQ(s.tensor.at(1, 2, 0), 6.25);
  EXPECT_EQ(s.tensor.node_ids(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(s.tensor.interval_seconds(), 300);
}

TEST(CsvRead, IsoTimestampsDefineInterval) {
  std::istringstream in(
      "timestamp,a\n2012-03-01T00:00:00,1\n2012-03-01T00:05:00,2\n2012-03-01T00:10:00,3\n");
  const auto s = read_csv(in);
  EXPECT_EQ(s.tensor.interval_seconds(), 300);
  EXPECT_EQ(s.axis.style, TimestampStyle::iso8601);
  EXPECT_EQ(s.axis.format(2), "2012-03-01T00:10:00");
}

TEST(CsvRead, MissingCellNamesLineAndColumn) {
  const auto msg = parse_error_of("timestamp,a,b\n0,1,2\n1,,4\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
}

TEST(CsvRead, MalformedInputsArePositioned) {
  EXPECT_NE(parse_error_of("timestamp,a,b\n0,1,2\n1,3\n").find("line 3"), std::string::npos);
  const auto nan = parse_error_of("timestamp,a\n0,1\n1,nan\n");
  EXPECT_NE(nan.find("line 3, column 2"), std::string::npos) << nan;
  const auto word = parse_error_of("timestamp,a\n0,fast\n");
  EXPECT_NE(word.find("line 2, column 2"), std::string::npos) << word;
  const auto gap = parse_error_of("timestamp,a\n0,1\n1,2\n3,4\n");
  EXPECT_NE(gap.find("line 4"), std::string::npos) << gap;
  const auto back = parse_error_of("timestamp,a\n2,1\n1,2\n");
  EXPECT_NE(back.find("line 3"), std::string::npos) << back;
  EXPECT_FALSE(parse_error_of("").empty());
}

TEST(CsvRoundTrip, PreservesValuesToSixDecimals) {
  SyntheticConfig cfg;
  cfg.n_nodes = 3;
  cfg.n_days = 1;
  const auto s = generate_synthetic(cfg);
  std::stringstream buf;
  write_csv(buf, s, TimeAxis{});
  const auto first = read_csv(buf);
  std::stringstream buf2;
  write_csv(buf2, first.tensor, first.axis);
  EXPECT_EQ(buf.str(), buf2.str());
  for (std::size_t i = 0; i < s.raw().size(); ++i) {
    ASSERT_NEAR(first.tensor.raw()[i], s.raw()[i], 5e-7);
  }
}

TEST(CsvRoundTrip, FileBased) {
  const auto path = std::filesystem::temp_directory_path() / "lfm_csv_roundtrip.csv";
  const TimeSeriesTensor t(2, 3, 1, {1.25, 2.5, 3.75, -1, 0, 1e-7}, {"x", "y"});
  save_csv(path, t, TimeAxis{});
  const auto back = load_csv(path);
  EXPECT_EQ(oracle::to_vector(back.tensor.raw()), oracle::to_vector(t.raw()));
  std::filesystem::remove(path);
  EXPECT_THROW(load_csv(path), Error);
}

TEST(ForecastCsv, WritesAndReadsBack) {
  const std::vector<ForecastRecord> recs{{0, 5, 1, 1.5, 2.0}, {1, 6, 2, 3.0, 0.0}};
  std::stringstream buf;
  write_forecast_csv(buf, recs, {"a", "b"}, TimeAxis{});
  const auto rows = read_forecast_csv(buf);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].node_id, "b");
  EXPECT_EQ(rows[1].timestamp, "6");
  const auto metrics = metrics_from_forecasts(rows, 1e-6);
  ASSERT_EQ(metrics.size(), 3u);
  EXPECT_EQ(metrics.back().label, "all");
  EXPECT_DOUBLE_EQ(metrics.back().report.mae, 1.75);
  EXPECT_EQ(metrics.back().report.n_masked, 1u);
}

TEST(Synthetic, NoiselessEqualsClosedForm) {
  SyntheticConfig cfg;
  cfg.n_nodes = 2;
  cfg.n_days = 2;
  cfg.noise_std = 0.0;
  cfg.spike_probability = 0.0;
  const auto s = generate_synthetic(cfg);
  const auto prof = synthetic_profiles(cfg);
  for (std::size_t n = 0; n < 2; ++n) {
    const auto& p = prof[n];
    ASSERT_GE(p.base_level, 55.0);
    ASSERT_LE(p.base_level, 70.0);
    for (std::size_t t = 0; t < s.n_steps(); ++t) {
      const double hour = std::fmod(t * 300.0, 86400.0) / 3600.0;
      auto gauss = [&](const RushHourDip& d) {
        const double z = (hour - d.center_hours) / d.width_hours;
        return d.depth * std::exp(-0.5 * z * z);
      };
      const double expect = p.base_level +
                            p.daily_amplitude * std::cos(2.0 * std::numbers::pi * (hour - 3.0) / 24.0) -
                            gauss(p.morning) - gauss(p.evening);
      ASSERT_NEAR(s.at(n, t, 0), expect, 1e-12);
    }
  }
}

TEST(Synthetic, SameSeedIsBitIdentical) {
  SyntheticConfig cfg;
  cfg.n_days = 2;
  const auto a = generate_synthetic(cfg), b = generate_synthetic(cfg);
  EXPECT_EQ(oracle::to_vector(a.raw()), oracle::to_vector(b.raw()));
  cfg.seed = 43;
  EXPECT_NE(oracle::to_vector(generate_synthetic(cfg).raw()), oracle::to_vector(a.raw()));
}

TEST(Synthetic, SpikeCountNearBinomialExpectation) {
  SyntheticConfig cfg;
  cfg.n_nodes = 1;
  cfg.n_days = 10;
  cfg.noise_std = 0.0;
  cfg.spike_probability = 0.0;
  const auto clean = generate_synthetic(cfg);
  cfg.spike_probability = 0.01;
  const auto spiky = generate_synthetic(cfg);
  ASSERT_EQ(clean.n_steps(), 2880u);
  std::size_t spikes = 0;
  for (std::size_t t = 0; t < 2880; ++t) spikes += spiky.at(0, t, 0) != clean.at(0, t, 0);
  const double mean = 2880 * 0.01;
  const double sigma = std::sqrt(2880 * 0.01 * 0.99);
  EXPECT_LE(std::abs(static_cast<double>(spikes) - mean), 3.0 * sigma) << spikes;
}

TEST(Synthetic, InvalidConfigRejected) {
  SyntheticConfig cfg;
  cfg.spike_probability = 1.5;
  EXPECT_THROW(generate_synthetic(cfg), InvalidArgument);
  cfg = {};
  cfg.noise_std = -1;
  EXPECT_THROW(generate_synthetic(cfg), InvalidArgument);
  cfg = {};
  cfg.interval_seconds = 7;
  EXPECT_THROW(generate_synthetic(cfg), InvalidArgument);
}

TEST(Normalization, StandardNormalSampleHasUnitStats) {
  const std::size_t n = 10000;
  std::mt19937_64 rng(123);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  const TimeSeriesTensor t(1, n, 1, v, {"a"});
  const auto stats = fit_normalization(t, {0, n});
  // Standard errors: mean 1/sqrt(n), std about 1/sqrt(2n).
  EXPECT_LE(std::abs(stats.mean()[0]), 5.0 / std::sqrt(double(n)));
  EXPECT_LE(std::abs(stats.std()[0] - 1.0), 5.0 / std::sqrt(2.0 * n));
}

TEST(Normalization, UsesOnlyTrainingRange) {
  const TimeSeriesTensor t(1, 6, 1, {1, 3, 1, 3, 100, 100}, {"a"});
  const auto stats = fit_normalization(t, {0, 4});
  EXPECT_DOUBLE_EQ(stats.mean()[0], 2.0);
  EXPECT_DOUBLE_EQ(stats.std()[0], 1.0);
}

TEST(Normalization, ApplyInvertIsIdentity) {
  const NormStats s({12.5, -3.0}, {4.0, 0.01});
  const Matrix m(50, 2, oracle::random_vector(100, 5, -1e3, 1e3));
  const Matrix back = s.invert(s.apply(m));
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(back.flat()[i], m.flat()[i], 1e-10);
}

TEST(Normalization, ZeroVarianceNamesFeature) {
  const TimeSeriesTensor t(2, 4, 1, std::vector<double>(8, 3.0), {"a", "b"});
  try {
    fit_normalization(t, {0, 4});
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("feature 0"), std::string::npos) << e.what();
  }
  EXPECT_THROW(NormStats({0.0}, {0.0}), InvalidArgument);
  EXPECT_THROW(fit_normalization(t, {0, 0}), InvalidArgument);
}

FilterPredictor perturbed_predictor(std::size_t history, std::uint64_t seed) {
  FilterPredictor p({history, 6, 1, 4}, NormStats({50.0}, {7.0}), seed);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.1);
  for (auto& ref : p.params()) {
    for (std::size_t i = 0; i < ref.value.size(); ++i) {
      if (std::find(ref.pinned.begin(), ref.pinned.end(), i) == ref.pinned.end()) ref.value[i] += g(rng);
    }
  }
  return p;
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  const auto p = perturbed_predictor(12, 1);
  std::stringstream buf;
  write_checkpoint(buf, p);
  const std::string bytes = buf.str();
  const auto q = read_checkpoint(buf);
  const Matrix h(12, 1, oracle::random_vector(12, 9, 30, 70));
  EXPECT_EQ(p.predict(h), q.predict(h));
  std::stringstream again;
  write_checkpoint(again, q);
  EXPECT_EQ(again.str(), bytes);
}

TEST(Checkpoint, TruncationIsDetectedAtEveryLength) {
  std::stringstream buf;
  write_checkpoint(buf, perturbed_predictor(4, 2));
  const std::string bytes = buf.str();
  for (std::size_t len = 0; len < bytes.size(); len += 7) {
    std::istringstream in(bytes.substr(0, len));
    EXPECT_THROW(read_checkpoint(in), CheckpointError) << len;
  }
  std::istringstream cut(bytes.substr(0, bytes.size() - 1));
  EXPECT_THROW(read_checkpoint(cut), CheckpointTruncatedError);
  std::istringstream extra(bytes + "x");
  EXPECT_THROW(read_checkpoint(extra), CheckpointError);
}

TEST(Checkpoint, MagicAndVersionErrorsAreDistinct) {
  std::stringstream buf;
  write_checkpoint(buf, perturbed_predictor(4, 3));
  std::string bad_magic = buf.str();
  bad_magic[0] = 'X';
  std::istringstream m(bad_magic);
  EXPECT_THROW(read_checkpoint(m), CheckpointFormatError);
  std::string bad_version = buf.str();
  bad_version[8] = 9;
  std::istringstream v(bad_version);
  EXPECT_THROW(read_checkpoint(v), CheckpointVersionError);
}

TEST(Checkpoint, ShapeExpectationNamesBothValues) {
  std::stringstream buf;
  write_checkpoint(buf, perturbed_predictor(12, 4));
  ShapeExpectation want;
  want.history = 24;
  try {
    read_checkpoint(buf, want);
    FAIL();
  } catch (const CheckpointShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("history=12"), std::string::npos) << msg;
    EXPECT_NE(msg.find("history=24"), std::string::npos) << msg;
  }
}

TEST(Checkpoint, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "lfm_ckpt_roundtrip.bin";
  const auto p = perturbed_predictor(8, 5);
  save_checkpoint(path, p);
  const auto q = load_checkpoint(path);
  const Matrix h(8, 1, oracle::random_vector(8, 1, 30, 70));
  EXPECT_EQ(p.predict(h), q.predict(h));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace lfm
