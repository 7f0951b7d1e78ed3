#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "svcache/content.hpp"
#include "svcache/delaymodel.hpp"
#include "svcache/geometry.hpp"
#include "svcache/optimizer.hpp"
#include "svcache/policy.hpp"

namespace svcache {

enum class DeliveryMode { sequential, parallel_ilt, slt };
enum class RateModel { fixed, sinr };

const char* delivery_mode_name(DeliveryMode m);
DeliveryMode delivery_mode_from_name(const std::string& name);
const char* rate_model_name(RateModel m);
RateModel rate_model_from_name(const std::string& name);

struct Request {
  std::size_t file = 1;     // 1-based
  std::size_t quality = 1;  // layers 1..quality requested
};

/// Everything held fixed across trials.
struct McEnvironment {
  const VideoLibrary* library = nullptr;  // non-owning
  TierConfig d2d;
  TierConfig sbs;
  TierConfig mbs;
  DelayParams params;  // fixed per-tier rates and the backhaul rate
  double window_radius_m = 150.0;
  double min_distance_m = 0.5;
};

/// Cache contents relevant to one trial's requested file: per node of each
/// tier, a bitmask with bit (l-1) set when layer l is cached there. Indices
/// align with the realization's point sets.
struct TrialCaches {
  std::vector<std::uint32_t> d2d;
  std::vector<std::uint32_t> sbs;
};

struct McPolicy {
  enum class Kind { layered, whole_file };
  Kind kind = Kind::layered;
  RandomPlacement layered;                // layered: per-layer caching probabilities
  std::vector<std::uint8_t> file_d2d;     // whole_file: cached-file indicators
  std::vector<std::uint8_t> file_sbs;

  static McPolicy from_random(RandomPlacement placement);
  static McPolicy from_whole_file(std::vector<std::uint8_t> d2d, std::vector<std::uint8_t> sbs);
};

struct TrialConfig {
  std::size_t n_trials = 100000;
  std::uint64_t seed = 1;
  DeliveryMode mode = DeliveryMode::sequential;
  RateModel rate_model = RateModel::fixed;
  std::size_t threads = 1;
};

struct DelayEstimate {
  double mean_s = 0.0;
  double std_error_s = 0.0;
  double ci95_halfwidth_s = 0.0;  // 1.96 * std_error
  std::size_t n_trials = 0;
  bool degenerate = false;  // single-trial sample, spread unknown
};

/// One transmission: bits over the tier downlink at the given distance.
/// rate = bandwidth * log2(1 + P*h*pl(d) / (interference + noise)).
double link_delay_s(double bits, const TierConfig& tier, double distance_m, double fading,
                    double interference_w, double min_distance_m);

/// Delivers the requested layers through the D2D -> SBS -> MBS cascade and
/// aggregates per the delivery mode (sum, max, or single super-layer stream).
/// MBS deliveries add bits/backhaul_rate on top of the downlink.
double run_trial(const NetworkRealization& nr, const TrialCaches& caches, Request request,
                 const McEnvironment& env, DeliveryMode mode, RateModel rate_model, Rng& rng);

/// Mean delay over independent trials: fresh topology, cache sample, request
/// and fading per trial, streams derived from (seed, trial index).
DelayEstimate estimate_delay(const McEnvironment& env, const McPolicy& policy,
                             const TrialConfig& tc);

enum class SweepAxis { backhaul_rate, sbs_cache_size };

const char* sweep_axis_name(SweepAxis a);

struct SweepRow {
  std::string axis_name;
  double axis_value = 0.0;  // config units: Mbit/s or Mbit
  std::string policy;
  std::string mode;
  double analytic_delay_s = 0.0;
  double mc_delay_s = 0.0;
  double mc_stderr_s = 0.0;
  std::size_t n_trials = 0;
  std::uint64_t seed = 0;
};

/// Figs. 4-5 style sweep: at every grid point evaluate no-cache, MPCP-no-SVC,
/// MPLP-SVC and the re-optimized random placement, analytically and by Monte
/// Carlo. Rows sorted by (axis value, policy, mode).
std::vector<SweepRow> sweep(const McEnvironment& base_env, const CacheCapacities& base_caps,
                            const OptimizerConfig& opt_config, SweepAxis axis,
                            std::span<const double> grid, const TrialConfig& tc);

std::string sweep_to_csv(std::span<const SweepRow> rows);

}  // namespace svcache
