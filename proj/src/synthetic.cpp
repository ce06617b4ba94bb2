#include "lfm/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "lfm/error.hpp"

namespace lfm {
namespace {

enum class Stream : std::uint32_t { shape = 0, noise = 1, spikes = 2 };

std::mt19937_64 stream_rng(std::uint64_t seed, std::size_t node, Stream which) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(node), static_cast<std::uint32_t>(which)};
  return std::mt19937_64(seq);
}

void require_range(double lo, double hi, const char* name) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
    throw InvalidArgument(detail::concat(name, " range [", lo, ", ", hi, "] is invalid"));
  }
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double dip(const RushHourDip& d, double hour_of_day) {
  const double z = (hour_of_day - d.center_hours) / d.width_hours;
  return d.depth * std::exp(-0.5 * z * z);
}

}  // namespace

void SyntheticConfig::validate() const {
  if (n_nodes == 0) throw InvalidArgument("n_nodes must be >= 1");
  if (n_days == 0) throw InvalidArgument("n_days must be >= 1");
  if (interval_seconds <= 0 || 86400 % interval_seconds != 0) {
    throw InvalidArgument(detail::concat("interval_seconds must divide 86400, got ",
                                         interval_seconds));
  }
  require_range(base_level_min, base_level_max, "base level");
  require_range(daily_amplitude_min, daily_amplitude_max, "daily amplitude");
  require_range(dip_depth_min, dip_depth_max, "dip depth");
  require_range(dip_width_min_hours, dip_width_max_hours, "dip width");
  require_range(spike_magnitude_min, spike_magnitude_max, "spike magnitude");
  if (!(dip_width_min_hours > 0.0)) throw InvalidArgument("dip width must be positive");
  if (!(center_jitter_hours >= 0.0)) throw InvalidArgument("center jitter must be >= 0");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw InvalidArgument(detail::concat("noise_std must be >= 0, got ", noise_std));
  }
  if (!(spike_probability >= 0.0 && spike_probability <= 1.0)) {
    throw InvalidArgument(detail::concat("spike_probability must lie in [0, 1], got ",
                                         spike_probability));
  }
  if (!(spike_magnitude_min > 0.0)) throw InvalidArgument("spike magnitudes must be positive");
}

double NodeProfile::level(double seconds) const {
  const double hour = std::fmod(seconds, 86400.0) / 3600.0;
  // Daily cycle peaks in the early morning hours when roads are empty.
  const double cycle = daily_amplitude * std::cos(2.0 * std::numbers::pi * (hour - 3.0) / 24.0);
  return base_level + cycle - dip(morning, hour) - dip(evening, hour);
}

std::vector<NodeProfile> synthetic_profiles(const SyntheticConfig& cfg) {
  cfg.validate();
  std::vector<NodeProfile> out;
  out.reserve(cfg.n_nodes);
  for (std::size_t node = 0; node < cfg.n_nodes; ++node) {
    auto rng = stream_rng(cfg.seed, node, Stream::shape);
    NodeProfile p{};
    p.base_level = uniform(rng, cfg.base_level_min, cfg.base_level_max);
    p.daily_amplitude = uniform(rng, cfg.daily_amplitude_min, cfg.daily_amplitude_max);
    const double jitter = cfg.center_jitter_hours;
    p.morning.center_hours = cfg.morning_center_hours + uniform(rng, -jitter, jitter);
    p.morning.width_hours = uniform(rng, cfg.dip_width_min_hours, cfg.dip_width_max_hours);
    p.morning.depth = uniform(rng, cfg.dip_depth_min, cfg.dip_depth_max);
    p.evening.center_hours = cfg.evening_center_hours + uniform(rng, -jitter, jitter);
    p.evening.width_hours = uniform(rng, cfg.dip_width_min_hours, cfg.dip_width_max_hours);
    p.evening.depth = uniform(rng, cfg.dip_depth_min, cfg.dip_depth_max);
    out.push_back(p);
  }
  return out;
}

TimeSeriesTensor generate_synthetic(const SyntheticConfig& cfg) {
  const auto profiles = synthetic_profiles(cfg);
  const std::size_t steps = cfg.n_steps();
  std::vector<double> values;
  values.reserve(cfg.n_nodes * steps);
  std::vector<std::string> ids;
  for (std::size_t node = 0; node < cfg.n_nodes; ++node) {
    ids.push_back("node_" + std::to_string(node));
    auto noise_rng = stream_rng(cfg.seed, node, Stream::noise);
    auto spike_rng = stream_rng(cfg.seed, node, Stream::spikes);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t t = 0; t < steps; ++t) {
      double v = profiles[node].level(static_cast<double>(t * cfg.interval_seconds));
      const double z = noise(noise_rng);
      if (cfg.noise_std > 0.0) v += cfg.noise_std * z;
      // Three draws per step whether or not a spike fires keep the stream aligned.
      const double fire = unit(spike_rng);
      const double magnitude = cfg.spike_magnitude_min +
                               (cfg.spike_magnitude_max - cfg.spike_magnitude_min) * unit(spike_rng);
      const bool negative = unit(spike_rng) < 0.5;
      if (fire < cfg.spike_probability) v += negative ? -magnitude : magnitude;
      values.push_back(v);
    }
  }
  return TimeSeriesTensor(cfg.n_nodes, steps, 1, std::move(values), std::move(ids),
                          cfg.interval_seconds);
}

}  // namespace lfm
