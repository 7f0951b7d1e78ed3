#include "svcache/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"

namespace svcache {

RandomPlacement zero_placement(const VideoLibrary& lib) {
  return RandomPlacement{Grid<double>(lib.file_count(), lib.layers_per_file(), 0.0),
                         Grid<double>(lib.file_count(), lib.layers_per_file(), 0.0)};
}

RandomPlacement uniform_placement(const VideoLibrary& lib, const CacheCapacities& caps) {
  CompensatedSum total;
  for (double b : lib.layer_bits_grid().flat()) total.add(b);
  auto level = [&](double cap) {
    if (cap < 0.0) throw InvalidArgument("capacity must be >= 0");
    return std::clamp(cap / total.value(), 0.0, 1.0);
  };
  return RandomPlacement{
      Grid<double>(lib.file_count(), lib.layers_per_file(), level(caps.d2d_bits)),
      Grid<double>(lib.file_count(), lib.layers_per_file(), level(caps.sbs_bits))};
}

RandomPlacement binary_to_random(const BinaryPlacement& d2d, const BinaryPlacement& sbs) {
  if (!d2d.cached.same_shape(sbs.cached)) throw InvalidArgument("placement shape mismatch");
  RandomPlacement out{Grid<double>(d2d.cached.rows(), d2d.cached.cols()),
                      Grid<double>(sbs.cached.rows(), sbs.cached.cols())};
  for (std::size_t i = 0; i < d2d.cached.size(); ++i) {
    out.d2d[i] = d2d.cached[i] ? 1.0 : 0.0;
    out.sbs[i] = sbs.cached[i] ? 1.0 : 0.0;
  }
  return out;
}

BinaryPlacement mplp_place(const VideoLibrary& lib, double capacity_bits, Tier tier) {
  if (capacity_bits < 0.0) throw InvalidArgument("capacity must be >= 0");
  const std::size_t F = lib.file_count();
  const std::size_t L = lib.layers_per_file();

  struct Entry {
    double weight;
    std::size_t f, l;  // 1-based
  };
  std::vector<Entry> order;
  order.reserve(F * L);
  for (std::size_t f = 1; f <= F; ++f) {
    for (std::size_t l = 1; l <= L; ++l) {
      order.push_back({lib.layer_request_prob(f, l), f, l});
    }
  }
  std::stable_sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.f != b.f) return a.f < b.f;
    return a.l < b.l;
  });

  BinaryPlacement placement{tier, Grid<std::uint8_t>(F, L, 0)};
  double used = 0.0;
  for (const Entry& e : order) {
    const double bits = lib.layer_bits(e.f, e.l);
    if (used + bits > capacity_bits) break;  // longest feasible prefix of the order
    placement.cached(e.f - 1, e.l - 1) = 1;
    used += bits;
  }
  return placement;
}

std::vector<std::uint8_t> mpcp_no_svc_place(const VideoLibrary& lib, double capacity_bits) {
  if (capacity_bits < 0.0) throw InvalidArgument("capacity must be >= 0");
  std::vector<std::uint8_t> cached(lib.file_count(), 0);
  // Files come pre-sorted by popularity; ties already favor the lower index.
  double used = 0.0;
  for (std::size_t f = 1; f <= lib.file_count(); ++f) {
    if (used + lib.no_svc_file_bits() > capacity_bits) break;
    cached[f - 1] = 1;
    used += lib.no_svc_file_bits();
  }
  return cached;
}

double occupancy_bits(const Grid<double>& probs, const VideoLibrary& lib) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < probs.size(); ++i) acc.add(probs[i] * lib.layer_bits_grid()[i]);
  return acc.value();
}

double occupancy_bits(const Grid<std::uint8_t>& cached, const VideoLibrary& lib) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < cached.size(); ++i) {
    if (cached[i]) acc.add(lib.layer_bits_grid()[i]);
  }
  return acc.value();
}

namespace {

void check_shape(std::size_t rows, std::size_t cols, const VideoLibrary& lib) {
  if (rows != lib.file_count() || cols != lib.layers_per_file()) {
    throw InvalidArgument("placement dimensions do not match the library");
  }
}

}  // namespace

FeasibilityResult check_feasibility(const Grid<double>& probs, const VideoLibrary& lib,
                                    double capacity_bits) {
  check_shape(probs.rows(), probs.cols(), lib);
  const double slack = capacity_bits - occupancy_bits(probs, lib);
  return FeasibilityResult{slack >= 0.0, slack};
}

FeasibilityResult check_feasibility(const Grid<std::uint8_t>& cached, const VideoLibrary& lib,
                                    double capacity_bits) {
  check_shape(cached.rows(), cached.cols(), lib);
  const double slack = capacity_bits - occupancy_bits(cached, lib);
  return FeasibilityResult{slack >= 0.0, slack};
}

void validate_probability_grid(const Grid<double>& probs, const VideoLibrary& lib) {
  check_shape(probs.rows(), probs.cols(), lib);
  for (double p : probs.flat()) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvalidArgument("caching probabilities must lie in [0, 1]");
    }
  }
}

Grid<std::uint8_t> sample_cache_contents(const Grid<double>& tier_probs, Rng& rng) {
  Grid<std::uint8_t> contents(tier_probs.rows(), tier_probs.cols(), 0);
  for (std::size_t i = 0; i < tier_probs.size(); ++i) {
    contents[i] = rng.bernoulli(tier_probs[i]) ? 1 : 0;
  }
  return contents;
}

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string library_fingerprint(const VideoLibrary& lib) {
  nlohmann::json j;
  j["file_count"] = lib.file_count();
  j["layers_per_file"] = lib.layers_per_file();
  j["no_svc_file_bits"] = lib.no_svc_file_bits();
  j["layer_bits"] = std::vector<double>(lib.layer_bits_grid().flat().begin(),
                                        lib.layer_bits_grid().flat().end());
  j["popularity_alpha"] = lib.popularity_params().alpha;
  j["popularity_plateau"] = lib.popularity_params().plateau;
  std::vector<double> pref(lib.preference().levels());
  for (std::size_t q = 1; q <= pref.size(); ++q) pref[q - 1] = lib.preference().pmf(q);
  j["preference_pmf"] = pref;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(j.dump())));
  return std::string(buf);
}

std::string placement_to_json(const RandomPlacement& placement, const std::string& fingerprint,
                              const std::string& config_echo) {
  nlohmann::json j;
  j["schema_version"] = "1";
  j["library_fingerprint"] = fingerprint;
  auto tier_json = [](const Grid<double>& g) {
    nlohmann::json t;
    t["rows"] = g.rows();
    t["cols"] = g.cols();
    t["p"] = std::vector<double>(g.flat().begin(), g.flat().end());
    return t;
  };
  j["tiers"]["d2d"] = tier_json(placement.d2d);
  j["tiers"]["sbs"] = tier_json(placement.sbs);
  if (!config_echo.empty()) j["config"] = nlohmann::json::parse(config_echo);
  return j.dump(2) + "\n";
}

LoadedPlacement placement_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  auto tier_grid = [&](const char* name) {
    const auto& t = j.at("tiers").at(name);
    const std::size_t rows = t.at("rows").get<std::size_t>();
    const std::size_t cols = t.at("cols").get<std::size_t>();
    const auto values = t.at("p").get<std::vector<double>>();
    if (values.size() != rows * cols) throw InvalidArgument("placement matrix size mismatch");
    Grid<double> g(rows, cols);
    std::copy(values.begin(), values.end(), g.flat().begin());
    return g;
  };
  LoadedPlacement lp;
  lp.placement.d2d = tier_grid("d2d");
  lp.placement.sbs = tier_grid("sbs");
  lp.fingerprint = j.at("library_fingerprint").get<std::string>();
  return lp;
}

}  // namespace svcache
