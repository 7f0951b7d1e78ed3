#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svcache/content.hpp"
#include "svcache/geometry.hpp"
#include "svcache/montecarlo.hpp"
#include "svcache/optimizer.hpp"

namespace svcache {

/// Config validation failure with the JSON field path that caused it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message) {}
};

struct TierBlock {
  double density_per_m2 = 0.0;
  double serving_radius_m = 0.0;  // absent for the MBS tier
  double tx_power_w = 0.0;
  double pathloss_exponent = 4.0;
  double bandwidth_hz = 10.0e6;
  double noise_power_w = 1.0e-13;
  double cache_size_mbit = 0.0;  // absent for the MBS tier
};

struct RatesBlock {
  std::string rate_model = "fixed";  // "fixed" or "estimate"
  double d2d_mbit_s = 150.0;
  double sbs_mbit_s = 100.0;
  double mbs_mbit_s = 40.0;
  double backhaul_mbit_s = 20.0;
  std::size_t spectral_efficiency_samples = 100000;
};

struct GeometryBlock {
  double window_radius_m = 150.0;  // 5 x r_sbs; interference truncated beyond
  double min_distance_m = 0.5;
};

struct TrialsBlock {
  std::size_t n_trials = 100000;
  std::uint64_t seed = 20240801;
  std::string mode = "sequential";
  std::string rate_model = "fixed";
};

struct SweepBlock {
  std::vector<double> backhaul_rate_mbit_s = {5.0, 10.0, 20.0, 35.0, 50.0};
  std::vector<double> sbs_cache_size_mbit = {125.0, 250.0, 500.0, 750.0, 1000.0};
};

/// Mirror of the JSON experiment config. Unknown fields are rejected; every
/// field has a default so "{}" is a valid config, and to_json() materializes
/// all of them for the output echo.
struct ExperimentConfig {
  std::string schema_version = "1";
  LibraryConfig library;
  TierBlock d2d{1.0e-3, 10.0, 0.1, 4.0, 10.0e6, 1.0e-13, 200.0};
  TierBlock sbs{2.0e-4, 30.0, 1.0, 4.0, 10.0e6, 1.0e-13, 500.0};
  TierBlock mbs{2.0e-5, 0.0, 10.0, 4.0, 10.0e6, 1.0e-13, 0.0};
  RatesBlock rates;
  GeometryBlock geometry;
  OptimizerConfig optimizer;
  TrialsBlock trials;
  SweepBlock sweep;

  static ExperimentConfig defaults() { return {}; }
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  /// Fully materialized echo (sorted keys, round-trip floats); reparses as a
  /// valid config.
  std::string to_json_text() const;
};

/// Runtime objects assembled from a validated config.
struct Experiment {
  VideoLibrary library;
  TierConfig d2d;
  TierConfig sbs;
  TierConfig mbs;
  CacheCapacities caps;
  DelayParams params;
  OptimizerConfig optimizer;
  TrialConfig trial;
  SweepBlock sweep;
  GeometryBlock geometry;
  std::string config_echo;
  std::string fingerprint;

  McEnvironment env() const;
};

/// Validates cross-field invariants and builds the runtime experiment. With
/// rate_model "estimate" the per-tier rates come from mean_spectral_efficiency
/// seeded by the config seed.
Experiment materialize(const ExperimentConfig& cfg);

}  // namespace svcache
