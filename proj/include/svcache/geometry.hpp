#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "svcache/rng.hpp"

namespace svcache {

enum class Tier { d2d, sbs, mbs };

const char* tier_name(Tier t);

struct TierConfig {
  Tier id = Tier::d2d;
  double density_per_m2 = 0.0;
  /// Serving radius around the typical user; infinity for the MBS tier
  /// (the nearest MBS always serves).
  double serving_radius_m = std::numeric_limits<double>::infinity();
  double tx_power_w = 1.0;
  double pathloss_exponent = 4.0;
  double bandwidth_hz = 10.0e6;
  double noise_power_w = 1.0e-13;
};

/// Throws unless density > 0, pathloss exponent > 2, power/bandwidth/noise > 0.
void validate_tier(const TierConfig& tier);

struct PointSet {
  std::vector<double> x;
  std::vector<double> y;
  std::size_t size() const { return x.size(); }
  void push_back(double px, double py) {
    x.push_back(px);
    y.push_back(py);
  }
};

/// Homogeneous PPP on a disk of the given radius centered on the origin.
PointSet sample_ppp(double density_per_m2, double window_radius_m, Rng& rng);

/// One sampled topology around the typical user at the origin. D2D and SBS
/// points cover the whole window; the MBS set always contains at least one
/// point, with index 0 the nearest MBS (its distance drawn from the exact
/// nearest-point law, the rest as a PPP on the annulus inside the window).
struct NetworkRealization {
  PointSet d2d;
  PointSet sbs;
  PointSet mbs;
  double window_radius_m = 0.0;
  std::uint64_t seed = 0;
};

NetworkRealization sample_realization(const TierConfig& d2d, const TierConfig& sbs,
                                      const TierConfig& mbs, double window_radius_m,
                                      std::uint64_t seed);

std::string realization_to_json(const NetworkRealization& nr);

/// d^-alpha; d must be positive (callers clamp to a minimum distance first).
double pathloss_gain(double distance_m, double pathloss_exponent);

/// Rayleigh-fading power gain: Exp(1).
inline double sample_fading(Rng& rng) { return rng.exponential(); }

double sinr(double serving_power, std::span<const double> interferer_powers,
            double noise_power);

/// 1 - exp(-lambda * p * pi * r^2): at least one node of the p-thinned tier
/// within the serving radius.
double hit_probability(double density_per_m2, double caching_prob, double radius_m);

struct SpectralEfficiencyEstimate {
  double mean_bps_hz = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

struct SpectralEfficiencyOptions {
  double window_radius_m = 150.0;
  double min_distance_m = 0.5;
  /// If > 0, skip distance sampling and place the serving node here.
  double fixed_serving_distance_m = 0.0;
  bool include_interference = true;
};

/// Monte Carlo E[log2(1+SINR)] for a tier: serving node at the nearest-point
/// distance (conditioned within the serving radius where one applies),
/// interferers the remaining same-tier nodes in the window, Rayleigh fading
/// throughout.
SpectralEfficiencyEstimate mean_spectral_efficiency(const TierConfig& tier, Rng& rng,
                                                    std::size_t n_samples,
                                                    const SpectralEfficiencyOptions& options = {});

}  // namespace svcache
