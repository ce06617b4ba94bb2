#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lfm/tensor.hpp"

namespace lfm {

/// Traffic-like series: per-node base level + daily sinusoid + two rush-hour
/// dips, plus iid gaussian noise and sparse signed spikes. Per-node shape
/// parameters are drawn uniformly from the given ranges.
struct SyntheticConfig {
  std::size_t n_nodes = 5;
  std::size_t n_days = 30;
  long interval_seconds = 300;

  double base_level_min = 55.0;
  double base_level_max = 70.0;
  double daily_amplitude_min = 3.0;
  double daily_amplitude_max = 8.0;

  double morning_center_hours = 8.0;
  double evening_center_hours = 17.5;
  double center_jitter_hours = 0.5;
  double dip_depth_min = 8.0;
  double dip_depth_max = 20.0;
  double dip_width_min_hours = 0.5;
  double dip_width_max_hours = 1.25;

  double noise_std = 2.0;
  double spike_probability = 0.02;
  double spike_magnitude_min = 5.0;
  double spike_magnitude_max = 20.0;

  std::uint64_t seed = 42;

  void validate() const;
  std::size_t n_steps() const { return n_days * (86400 / static_cast<std::size_t>(interval_seconds)); }
};

struct RushHourDip {
  double center_hours;
  double width_hours;
  double depth;
};

/// Noise-free shape of one node.
struct NodeProfile {
  double base_level;
  double daily_amplitude;
  RushHourDip morning;
  RushHourDip evening;

  /// Smooth level at `seconds` since the start of the series.
  double level(double seconds) const;
};

/// Deterministic per-node shape draws for `cfg`.
std::vector<NodeProfile> synthetic_profiles(const SyntheticConfig& cfg);

/// Pure function of `cfg` (seed included). Noise and spikes use independent
/// random streams per node, so changing the spike probability leaves the
/// noise realisation untouched.
TimeSeriesTensor generate_synthetic(const SyntheticConfig& cfg);

}  // namespace lfm
