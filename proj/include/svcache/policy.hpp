#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "svcache/common.hpp"
#include "svcache/content.hpp"
#include "svcache/geometry.hpp"
#include "svcache/rng.hpp"

namespace svcache {

struct CacheCapacities {
  double d2d_bits = 0.0;
  double sbs_bits = 0.0;
};

/// Probabilistic placement: every node of a tier caches layer (f, l)
/// independently with the tier's probability. Capacity holds in expectation.
struct RandomPlacement {
  Grid<double> d2d;
  Grid<double> sbs;
};

/// Hard 0/1 placement for a single tier; capacity holds exactly.
struct BinaryPlacement {
  Tier tier = Tier::d2d;
  Grid<std::uint8_t> cached;
};

/// Per-layer fraction cached at every node of each tier.
struct FractionalPlacement {
  Grid<double> d2d;
  Grid<double> sbs;
};

struct FeasibilityResult {
  bool feasible = false;
  double slack_bits = 0.0;
};

RandomPlacement zero_placement(const VideoLibrary& lib);

/// Expected-capacity-saturating uniform point: p = clip(C / sum(sizes), 0, 1).
RandomPlacement uniform_placement(const VideoLibrary& lib, const CacheCapacities& caps);

RandomPlacement binary_to_random(const BinaryPlacement& d2d, const BinaryPlacement& sbs);

/// Most-popular-layer placement: greedy fill in descending layer_request_prob
/// order (ties: lower file index, then lower layer index), taking the longest
/// prefix of that order that fits the capacity.
BinaryPlacement mplp_place(const VideoLibrary& lib, double capacity_bits, Tier tier);

/// Whole-file most-popular-content placement for the no-SVC baseline.
std::vector<std::uint8_t> mpcp_no_svc_place(const VideoLibrary& lib, double capacity_bits);

double occupancy_bits(const Grid<double>& probs, const VideoLibrary& lib);
double occupancy_bits(const Grid<std::uint8_t>& cached, const VideoLibrary& lib);

FeasibilityResult check_feasibility(const Grid<double>& probs, const VideoLibrary& lib,
                                    double capacity_bits);
FeasibilityResult check_feasibility(const Grid<std::uint8_t>& cached, const VideoLibrary& lib,
                                    double capacity_bits);

/// Throws unless the grid matches the library shape and entries lie in [0, 1].
void validate_probability_grid(const Grid<double>& probs, const VideoLibrary& lib);

/// One node's independently sampled cache contents (Bernoulli per layer).
Grid<std::uint8_t> sample_cache_contents(const Grid<double>& tier_probs, Rng& rng);

std::string library_fingerprint(const VideoLibrary& lib);

/// Placement snapshot: tier -> row-major F x L matrix plus the library
/// fingerprint; `config_echo` carries the fully resolved experiment config.
std::string placement_to_json(const RandomPlacement& placement, const std::string& fingerprint,
                              const std::string& config_echo);

struct LoadedPlacement {
  RandomPlacement placement;
  std::string fingerprint;
};

LoadedPlacement placement_from_json(const std::string& text);

}  // namespace svcache
