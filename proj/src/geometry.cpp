#include "svcache/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"
#include "svcache/common.hpp"
#include "svcache/kernels/kernels.hpp"

namespace svcache {

namespace {
constexpr double kPi = std::numbers::pi;
}

const char* tier_name(Tier t) {
  switch (t) {
    case Tier::d2d: return "d2d";
    case Tier::sbs: return "sbs";
    case Tier::mbs: return "mbs";
  }
  return "?";
}

void validate_tier(const TierConfig& tier) {
  if (!(tier.density_per_m2 > 0.0)) throw InvalidArgument("tier density must be > 0");
  if (!(tier.pathloss_exponent > 2.0)) throw InvalidArgument("pathloss exponent must be > 2");
  if (!(tier.tx_power_w > 0.0)) throw InvalidArgument("tx power must be > 0");
  if (!(tier.bandwidth_hz > 0.0)) throw InvalidArgument("bandwidth must be > 0");
  if (!(tier.noise_power_w > 0.0)) throw InvalidArgument("noise power must be > 0");
  if (!(tier.serving_radius_m > 0.0)) throw InvalidArgument("serving radius must be > 0");
}

PointSet sample_ppp(double density_per_m2, double window_radius_m, Rng& rng) {
  if (density_per_m2 < 0.0 || !std::isfinite(density_per_m2)) {
    throw InvalidArgument("density must be >= 0");
  }
  if (!(window_radius_m > 0.0)) throw InvalidArgument("window radius must be > 0");
  const double mean = density_per_m2 * kPi * window_radius_m * window_radius_m;
  const std::uint64_t count = rng.poisson(mean);
  PointSet points;
  points.x.reserve(count);
  points.y.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double r = window_radius_m * std::sqrt(rng.u01());
    const double theta = 2.0 * kPi * rng.u01();
    points.push_back(r * std::cos(theta), r * std::sin(theta));
  }
  return points;
}

namespace {

// Nearest-point decomposition of a PPP seen from the origin: the nearest
// distance is Rayleigh (inversion of the void probability), and the process
// beyond it is an independent PPP on the annulus.
PointSet sample_with_nearest(double density, double window_radius, Rng& rng) {
  const double d_near = std::sqrt(-std::log(rng.u01_open_left()) / (density * kPi));
  PointSet points;
  const double theta0 = 2.0 * kPi * rng.u01();
  points.push_back(d_near * std::cos(theta0), d_near * std::sin(theta0));
  if (d_near < window_radius) {
    const double area = kPi * (window_radius * window_radius - d_near * d_near);
    const std::uint64_t count = rng.poisson(density * area);
    for (std::uint64_t i = 0; i < count; ++i) {
      const double r2 = rng.uniform(d_near * d_near, window_radius * window_radius);
      const double r = std::sqrt(r2);
      const double theta = 2.0 * kPi * rng.u01();
      points.push_back(r * std::cos(theta), r * std::sin(theta));
    }
  }
  return points;
}

}  // namespace

NetworkRealization sample_realization(const TierConfig& d2d, const TierConfig& sbs,
                                      const TierConfig& mbs, double window_radius_m,
                                      std::uint64_t seed) {
  validate_tier(d2d);
  validate_tier(sbs);
  validate_tier(mbs);
  if (!(window_radius_m > 0.0)) throw InvalidArgument("window radius must be > 0");
  NetworkRealization nr;
  nr.window_radius_m = window_radius_m;
  nr.seed = seed;
  Rng rng_d2d = Rng::stream(seed, 0);
  Rng rng_sbs = Rng::stream(seed, 1);
  Rng rng_mbs = Rng::stream(seed, 2);
  nr.d2d = sample_ppp(d2d.density_per_m2, window_radius_m, rng_d2d);
  nr.sbs = sample_ppp(sbs.density_per_m2, window_radius_m, rng_sbs);
  nr.mbs = sample_with_nearest(mbs.density_per_m2, window_radius_m, rng_mbs);
  return nr;
}

std::string realization_to_json(const NetworkRealization& nr) {
  nlohmann::json j;
  j["seed"] = nr.seed;
  j["window_radius_m"] = nr.window_radius_m;
  auto tier_points = [](const PointSet& ps) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < ps.size(); ++i) arr.push_back({ps.x[i], ps.y[i]});
    return arr;
  };
  j["tiers"]["d2d"] = tier_points(nr.d2d);
  j["tiers"]["sbs"] = tier_points(nr.sbs);
  j["tiers"]["mbs"] = tier_points(nr.mbs);
  return j.dump(2);
}

double pathloss_gain(double distance_m, double pathloss_exponent) {
  if (!(distance_m > 0.0)) throw InvalidArgument("distance must be > 0");
  return std::pow(distance_m, -pathloss_exponent);
}

double sinr(double serving_power, std::span<const double> interferer_powers,
            double noise_power) {
  if (serving_power < 0.0) throw InvalidArgument("serving power must be >= 0");
  if (!(noise_power > 0.0)) throw InvalidArgument("noise power must be > 0");
  CompensatedSum denom;
  for (double p : interferer_powers) {
    if (p < 0.0) throw InvalidArgument("interferer powers must be >= 0");
    denom.add(p);
  }
  return serving_power / (denom.value() + noise_power);
}

double hit_probability(double density_per_m2, double caching_prob, double radius_m) {
  if (density_per_m2 < 0.0 || !std::isfinite(density_per_m2)) {
    throw InvalidArgument("density must be >= 0");
  }
  if (!(caching_prob >= 0.0 && caching_prob <= 1.0)) {
    throw InvalidArgument("caching probability must lie in [0, 1]");
  }
  if (!(radius_m > 0.0)) throw InvalidArgument("radius must be > 0");
  return -std::expm1(-density_per_m2 * caching_prob * kPi * radius_m * radius_m);
}

namespace {

double interference_power(const std::vector<double>& dist2, std::vector<double>& fading,
                          const TierConfig& tier, double dmin, Rng& rng) {
  if (dist2.empty()) return 0.0;
  fading.resize(dist2.size());
  for (double& h : fading) h = sample_fading(rng);
  const double dmin2 = dmin * dmin;
  if (tier.pathloss_exponent == 4.0) {
    return tier.tx_power_w * kernels::active().interference_sum_pl4(
                                 dist2.data(), fading.data(), dist2.size(), dmin2);
  }
  CompensatedSum acc;
  for (std::size_t i = 0; i < dist2.size(); ++i) {
    const double d = std::sqrt(std::max(dist2[i], dmin2));
    acc.add(fading[i] * pathloss_gain(d, tier.pathloss_exponent));
  }
  return tier.tx_power_w * acc.value();
}

}  // namespace

SpectralEfficiencyEstimate mean_spectral_efficiency(const TierConfig& tier, Rng& rng,
                                                    std::size_t n_samples,
                                                    const SpectralEfficiencyOptions& options) {
  validate_tier(tier);
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");

  CompensatedSum sum;
  CompensatedSum sum_sq;
  std::vector<double> dist2;
  std::vector<double> fading;
  const double dmin = options.min_distance_m;
  const bool bounded = std::isfinite(tier.serving_radius_m);

  for (std::size_t s = 0; s < n_samples; ++s) {
    double serve_d = 0.0;
    dist2.clear();
    if (options.fixed_serving_distance_m > 0.0) {
      serve_d = options.fixed_serving_distance_m;
    } else if (bounded) {
      // Condition on at least one node within the serving radius.
      std::size_t attempts = 0;
      for (;;) {
        PointSet pts = sample_ppp(tier.density_per_m2, options.window_radius_m, rng);
        std::size_t best = pts.size();
        double best_d2 = tier.serving_radius_m * tier.serving_radius_m;
        dist2.clear();
        for (std::size_t i = 0; i < pts.size(); ++i) {
          const double d2 = pts.x[i] * pts.x[i] + pts.y[i] * pts.y[i];
          dist2.push_back(d2);
          if (d2 <= best_d2) {
            best_d2 = d2;
            best = i;
          }
        }
        if (best != pts.size()) {
          serve_d = std::sqrt(best_d2);
          std::swap(dist2[best], dist2.back());
          dist2.pop_back();
          break;
        }
        if (++attempts > 100000) {
          throw InvalidArgument("serving-node conditioning failed: hit probability too small");
        }
      }
    } else {
      serve_d = std::sqrt(-std::log(rng.u01_open_left()) / (tier.density_per_m2 * kPi));
      if (serve_d < options.window_radius_m) {
        const double lo = serve_d * serve_d;
        const double hi = options.window_radius_m * options.window_radius_m;
        const std::uint64_t count = rng.poisson(tier.density_per_m2 * kPi * (hi - lo));
        for (std::uint64_t i = 0; i < count; ++i) dist2.push_back(rng.uniform(lo, hi));
      }
    }

    const double serving = tier.tx_power_w * sample_fading(rng) *
                           pathloss_gain(std::max(serve_d, dmin), tier.pathloss_exponent);
    double interference = 0.0;
    if (options.include_interference && !dist2.empty()) {
      interference = interference_power(dist2, fading, tier, dmin, rng);
    }
    const double se = std::log2(1.0 + serving / (interference + tier.noise_power_w));
    sum.add(se);
    sum_sq.add(se * se);
  }

  SpectralEfficiencyEstimate est;
  est.n_samples = n_samples;
  est.mean_bps_hz = sum.value() / static_cast<double>(n_samples);
  if (n_samples > 1) {
    const double var =
        std::max(0.0, (sum_sq.value() - static_cast<double>(n_samples) * est.mean_bps_hz *
                                            est.mean_bps_hz) /
                          static_cast<double>(n_samples - 1));
    est.std_error = std::sqrt(var / static_cast<double>(n_samples));
  }
  return est;
}

}  // namespace svcache
