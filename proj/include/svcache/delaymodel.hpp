#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "svcache/content.hpp"
#include "svcache/kernels/kernels.hpp"
#include "svcache/policy.hpp"

namespace svcache {

/// Constants of the analytic delay objective. Mean downlink rates are treated
/// as fixed with respect to the caching probabilities (estimated once from
/// geometry or set directly); misses pay the MBS downlink plus the backhaul.
struct DelayParams {
  double rate_d2d_bps = 150.0e6;
  double rate_sbs_bps = 100.0e6;
  double rate_mbs_bps = 40.0e6;
  double backhaul_rate_bps = 20.0e6;
  double density_d2d_per_m2 = 1.0e-3;
  double radius_d2d_m = 10.0;
  double density_sbs_per_m2 = 2.0e-4;
  double radius_sbs_m = 30.0;

  /// lambda * pi * r^2 per unit caching probability.
  double hit_exponent_d2d() const;
  double hit_exponent_sbs() const;
  /// Per-bit delay of the miss path, s/bit.
  double mbs_path_s_per_bit() const { return 1.0 / rate_mbs_bps + 1.0 / backhaul_rate_bps; }

  void validate() const;
};

struct LayerDelayBreakdown {
  std::size_t file = 0;   // 1-based
  std::size_t layer = 0;  // 1-based
  double request_prob = 0.0;
  double h_d2d = 0.0;
  double h_sbs = 0.0;
  double layer_delay_s = 0.0;
  double contribution_s = 0.0;  // request_prob * layer_delay
};

struct ObjectiveValue {
  double total_delay_s = 0.0;
  std::vector<LayerDelayBreakdown> per_layer;
};

/// Objective evaluator bound to one (library, params) pair; precomputes the
/// request-mass and size arrays the kernels consume.
class DelayModel {
 public:
  DelayModel(const VideoLibrary& lib, const DelayParams& params);

  std::size_t entry_count() const { return weights_.size(); }
  const kernels::CascadeParams& cascade() const { return cascade_; }

  double objective(const RandomPlacement& placement) const;
  /// Objective plus d(objective)/dp for both tiers, written into gd/gs.
  double objective_and_gradient(const RandomPlacement& placement, Grid<double>& gd,
                                Grid<double>& gs) const;
  /// No-validation span form used by the optimizer inner loop and the
  /// complexity probe; spans must have entry_count() elements.
  double objective_and_gradient_raw(std::span<const double> pd, std::span<const double> ps,
                                    std::span<double> gd, std::span<double> gs) const;
  double objective_raw(std::span<const double> pd, std::span<const double> ps) const;

  ObjectiveValue breakdown(const RandomPlacement& placement) const;

 private:
  void validate_placement(const RandomPlacement& placement) const;

  std::size_t files_;
  std::size_t layers_;
  std::vector<double> weights_;  // layer_request_prob, row-major
  std::vector<double> sizes_;    // bits, row-major
  DelayParams params_;
  kernels::CascadeParams cascade_;
};

/// Expected delivery delay of layer (f, l) under the three-tier cascade.
double expected_layer_delay(std::size_t f, std::size_t l, const RandomPlacement& placement,
                            const VideoLibrary& lib, const DelayParams& params);

/// Request-mass weighted sum of per-layer delays (sequential delivery).
ObjectiveValue expected_total_delay(const RandomPlacement& placement, const VideoLibrary& lib,
                                    const DelayParams& params);

/// Analytic partials of the total delay with respect to each caching
/// probability; cost linear in F*L.
void delay_gradient(const RandomPlacement& placement, const VideoLibrary& lib,
                    const DelayParams& params, Grid<double>& grad_d2d, Grid<double>& grad_sbs);

enum class BaselinePolicy { no_cache, mplp_svc, mpcp_no_svc, binary_as_random };

const char* baseline_policy_name(BaselinePolicy p);

/// Closed-form delay of the benchmark policies. mplp_svc/mpcp_no_svc build
/// their placements from `caps`; binary_as_random evaluates `placement`.
double baseline_delay(BaselinePolicy policy, const VideoLibrary& lib, const DelayParams& params,
                      const CacheCapacities& caps, const RandomPlacement* placement = nullptr);

/// Whole-file no-SVC delay for explicit per-tier cached-file indicator sets.
double mpcp_no_svc_delay(const std::vector<std::uint8_t>& cached_d2d,
                         const std::vector<std::uint8_t>& cached_sbs, const VideoLibrary& lib,
                         const DelayParams& params);

/// Fractional caching evaluator: the cached fraction of each layer is served
/// by the tier cascade at full hit intensity, the remainder via MBS+backhaul.
double fractional_delay(const FractionalPlacement& fractions, const VideoLibrary& lib,
                        const DelayParams& params);

std::string breakdown_to_csv(const ObjectiveValue& value);

}  // namespace svcache
