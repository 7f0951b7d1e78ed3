#include "svcache/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace svcache {

namespace {

using nlohmann::json;

/// Strict object reader: every access is tracked, leftover keys are an error.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  double number(const char* key, double fallback, double lo, double hi) {
    mark(key);
    if (!j_.contains(key)) return check_range(fallback, key, lo, hi);
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    return check_range(v.get<double>(), key, lo, hi);
  }

  std::size_t count(const char* key, std::size_t fallback, std::size_t lo) {
    mark(key);
    if (!j_.contains(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) throw ConfigError(field(key), "expected a nonnegative integer");
    const auto n = v.get<std::size_t>();
    if (n < lo) throw ConfigError(field(key), "value below minimum " + std::to_string(lo));
    return n;
  }

  std::uint64_t u64(const char* key, std::uint64_t fallback) {
    mark(key);
    if (!j_.contains(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) throw ConfigError(field(key), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string text(const char* key, const std::string& fallback,
                   const std::set<std::string>& allowed = {}) {
    mark(key);
    std::string value = fallback;
    if (j_.contains(key)) {
      const json& v = j_.at(key);
      if (!v.is_string()) throw ConfigError(field(key), "expected a string");
      value = v.get<std::string>();
    }
    if (!allowed.empty() && allowed.count(value) == 0) {
      std::string opts;
      for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
      throw ConfigError(field(key), "must be one of: " + opts);
    }
    return value;
  }

  std::vector<double> number_array(const char* key, std::vector<double> fallback, double lo,
                                   double hi) {
    mark(key);
    if (!j_.contains(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(field(key), "expected a non-empty array");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) throw ConfigError(field(key), "expected numeric entries");
      out.push_back(check_range(e.get<double>(), key, lo, hi));
    }
    return out;
  }

  ObjectReader object(const char* key) {
    mark(key);
    static const json empty = json::object();
    return ObjectReader(j_.contains(key) ? j_.at(key) : empty, field(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (seen_.count(it.key()) == 0) {
        throw ConfigError(field(it.key().c_str()), "unknown field");
      }
    }
  }

 private:
  void mark(const char* key) { seen_.insert(key); }
  std::string field(const char* key) const { return path_ + "." + key; }
  double check_range(double v, const char* key, double lo, double hi) const {
    if (!std::isfinite(v) || v < lo || v > hi) {
      std::ostringstream os;
      os << "value " << v << " outside [" << lo << ", " << hi << "]";
      throw ConfigError(field(key), os.str());
    }
    return v;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

TierBlock read_tier(ObjectReader r, const TierBlock& defaults, bool has_radius_and_cache) {
  TierBlock t = defaults;
  t.density_per_m2 = r.number("density_per_m2", defaults.density_per_m2, 1.0e-12, 1.0);
  if (has_radius_and_cache) {
    t.serving_radius_m = r.number("serving_radius_m", defaults.serving_radius_m, 1.0e-6, 1.0e5);
    t.cache_size_mbit = r.number("cache_size_mbit", defaults.cache_size_mbit, 0.0, 1.0e9);
  }
  t.tx_power_w = r.number("tx_power_w", defaults.tx_power_w, 1.0e-9, 1.0e6);
  t.pathloss_exponent = r.number("pathloss_exponent", defaults.pathloss_exponent, 2.0 + 1e-9, 8.0);
  t.bandwidth_hz = r.number("bandwidth_hz", defaults.bandwidth_hz, 1.0, 1.0e12);
  t.noise_power_w = r.number("noise_power_w", defaults.noise_power_w, 1.0e-30, 1.0);
  r.finish();
  return t;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("JSON parse error: ") + e.what());
  }
  ExperimentConfig cfg;
  ObjectReader root(j, "config");

  const std::string version = root.text("schema_version", cfg.schema_version);
  if (version != "1") throw ConfigError("config.schema_version", "unsupported version");

  {
    ObjectReader lib = root.object("library");
    cfg.library.file_count = lib.count("file_count", cfg.library.file_count, 1);
    cfg.library.layers_per_file = lib.count("layers_per_file", cfg.library.layers_per_file, 1);
    if (cfg.library.layers_per_file > 32) {
      throw ConfigError("config.library.layers_per_file", "at most 32 layers supported");
    }
    cfg.library.base_size_mbit = lib.number("base_size_mbit", cfg.library.base_size_mbit,
                                            1.0e-9, 1.0e9);
    cfg.library.svc_overhead = lib.number("svc_overhead", cfg.library.svc_overhead, 0.0, 10.0);
    {
      ObjectReader pop = lib.object("popularity");
      cfg.library.popularity.alpha = pop.number("alpha", cfg.library.popularity.alpha, 0.0, 10.0);
      cfg.library.popularity.plateau =
          pop.number("plateau", cfg.library.popularity.plateau, 0.0, 1.0e6);
      pop.finish();
    }
    {
      ObjectReader pref = lib.object("preference");
      cfg.library.preference_rho = pref.number("rho", cfg.library.preference_rho, 1.0e-6, 1.0e6);
      pref.finish();
    }
    lib.finish();
  }
  {
    ObjectReader tiers = root.object("tiers");
    cfg.d2d = read_tier(tiers.object("d2d"), cfg.d2d, true);
    cfg.sbs = read_tier(tiers.object("sbs"), cfg.sbs, true);
    cfg.mbs = read_tier(tiers.object("mbs"), cfg.mbs, false);
    tiers.finish();
  }
  {
    ObjectReader rates = root.object("rates");
    cfg.rates.rate_model = rates.text("rate_model", cfg.rates.rate_model, {"fixed", "estimate"});
    cfg.rates.d2d_mbit_s = rates.number("d2d_mbit_s", cfg.rates.d2d_mbit_s, 1.0e-9, 1.0e9);
    cfg.rates.sbs_mbit_s = rates.number("sbs_mbit_s", cfg.rates.sbs_mbit_s, 1.0e-9, 1.0e9);
    cfg.rates.mbs_mbit_s = rates.number("mbs_mbit_s", cfg.rates.mbs_mbit_s, 1.0e-9, 1.0e9);
    cfg.rates.backhaul_mbit_s =
        rates.number("backhaul_mbit_s", cfg.rates.backhaul_mbit_s, 1.0e-9, 1.0e9);
    cfg.rates.spectral_efficiency_samples =
        rates.count("spectral_efficiency_samples", cfg.rates.spectral_efficiency_samples, 1);
    rates.finish();
  }
  {
    ObjectReader geom = root.object("geometry");
    cfg.geometry.window_radius_m =
        geom.number("window_radius_m", cfg.geometry.window_radius_m, 1.0e-3, 1.0e6);
    cfg.geometry.min_distance_m =
        geom.number("min_distance_m", cfg.geometry.min_distance_m, 1.0e-6, 1.0e3);
    geom.finish();
  }
  {
    ObjectReader opt = root.object("optimizer");
    cfg.optimizer.max_iterations = opt.count("max_iterations", cfg.optimizer.max_iterations, 1);
    cfg.optimizer.tolerance_rel =
        opt.number("tolerance_rel", cfg.optimizer.tolerance_rel, 1.0e-16, 1.0);
    {
      ObjectReader armijo = opt.object("armijo");
      cfg.optimizer.armijo.initial_step =
          armijo.number("initial_step", cfg.optimizer.armijo.initial_step, 1.0e-12, 1.0e6);
      cfg.optimizer.armijo.shrink =
          armijo.number("shrink", cfg.optimizer.armijo.shrink, 1.0e-6, 1.0 - 1.0e-6);
      cfg.optimizer.armijo.sufficient_decrease =
          armijo.number("sufficient_decrease", cfg.optimizer.armijo.sufficient_decrease,
                        1.0e-12, 1.0 - 1.0e-6);
      armijo.finish();
    }
    cfg.optimizer.projection_tolerance_bits = opt.number(
        "projection_tolerance_bits", cfg.optimizer.projection_tolerance_bits, 1.0e-12, 1.0e12);
    opt.finish();
  }
  {
    ObjectReader trials = root.object("trials");
    cfg.trials.n_trials = trials.count("n_trials", cfg.trials.n_trials, 1);
    cfg.trials.seed = trials.u64("seed", cfg.trials.seed);
    cfg.trials.mode =
        trials.text("mode", cfg.trials.mode, {"sequential", "parallel_ilt", "slt"});
    cfg.trials.rate_model = trials.text("rate_model", cfg.trials.rate_model, {"fixed", "sinr"});
    trials.finish();
  }
  {
    ObjectReader sw = root.object("sweep");
    cfg.sweep.backhaul_rate_mbit_s =
        sw.number_array("backhaul_rate_mbit_s", cfg.sweep.backhaul_rate_mbit_s, 1.0e-9, 1.0e9);
    cfg.sweep.sbs_cache_size_mbit =
        sw.number_array("sbs_cache_size_mbit", cfg.sweep.sbs_cache_size_mbit, 0.0, 1.0e9);
    sw.finish();
  }
  root.finish();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["schema_version"] = schema_version;
  j["library"] = {
      {"file_count", library.file_count},
      {"layers_per_file", library.layers_per_file},
      {"base_size_mbit", library.base_size_mbit},
      {"svc_overhead", library.svc_overhead},
      {"popularity", {{"alpha", library.popularity.alpha}, {"plateau", library.popularity.plateau}}},
      {"preference", {{"rho", library.preference_rho}}},
  };
  auto tier_json = [](const TierBlock& t, bool has_radius_and_cache) {
    json out = {
        {"density_per_m2", t.density_per_m2},
        {"tx_power_w", t.tx_power_w},
        {"pathloss_exponent", t.pathloss_exponent},
        {"bandwidth_hz", t.bandwidth_hz},
        {"noise_power_w", t.noise_power_w},
    };
    if (has_radius_and_cache) {
      out["serving_radius_m"] = t.serving_radius_m;
      out["cache_size_mbit"] = t.cache_size_mbit;
    }
    return out;
  };
  j["tiers"] = {{"d2d", tier_json(d2d, true)},
                {"sbs", tier_json(sbs, true)},
                {"mbs", tier_json(mbs, false)}};
  j["rates"] = {
      {"rate_model", rates.rate_model},
      {"d2d_mbit_s", rates.d2d_mbit_s},
      {"sbs_mbit_s", rates.sbs_mbit_s},
      {"mbs_mbit_s", rates.mbs_mbit_s},
      {"backhaul_mbit_s", rates.backhaul_mbit_s},
      {"spectral_efficiency_samples", rates.spectral_efficiency_samples},
  };
  j["geometry"] = {{"window_radius_m", geometry.window_radius_m},
                   {"min_distance_m", geometry.min_distance_m}};
  j["optimizer"] = {
      {"max_iterations", optimizer.max_iterations},
      {"tolerance_rel", optimizer.tolerance_rel},
      {"armijo",
       {{"initial_step", optimizer.armijo.initial_step},
        {"shrink", optimizer.armijo.shrink},
        {"sufficient_decrease", optimizer.armijo.sufficient_decrease}}},
      {"projection_tolerance_bits", optimizer.projection_tolerance_bits},
  };
  j["trials"] = {{"n_trials", trials.n_trials},
                 {"seed", trials.seed},
                 {"mode", trials.mode},
                 {"rate_model", trials.rate_model}};
  j["sweep"] = {{"backhaul_rate_mbit_s", sweep.backhaul_rate_mbit_s},
                {"sbs_cache_size_mbit", sweep.sbs_cache_size_mbit}};
  return j.dump();
}

McEnvironment Experiment::env() const {
  McEnvironment e;
  e.library = &library;
  e.d2d = d2d;
  e.sbs = sbs;
  e.mbs = mbs;
  e.params = params;
  e.window_radius_m = geometry.window_radius_m;
  e.min_distance_m = geometry.min_distance_m;
  return e;
}

Experiment materialize(const ExperimentConfig& cfg) {
  if (!(cfg.d2d.density_per_m2 > cfg.sbs.density_per_m2 &&
        cfg.sbs.density_per_m2 > cfg.mbs.density_per_m2)) {
    throw ConfigError("config.tiers", "densities must satisfy d2d > sbs > mbs");
  }

  auto to_tier = [](const TierBlock& b, Tier id, bool bounded) {
    TierConfig t;
    t.id = id;
    t.density_per_m2 = b.density_per_m2;
    t.serving_radius_m = bounded ? b.serving_radius_m : kInf;
    t.tx_power_w = b.tx_power_w;
    t.pathloss_exponent = b.pathloss_exponent;
    t.bandwidth_hz = b.bandwidth_hz;
    t.noise_power_w = b.noise_power_w;
    validate_tier(t);
    return t;
  };

  Experiment exp{
      build_library(cfg.library),
      to_tier(cfg.d2d, Tier::d2d, true),
      to_tier(cfg.sbs, Tier::sbs, true),
      to_tier(cfg.mbs, Tier::mbs, false),
      CacheCapacities{cfg.d2d.cache_size_mbit * kBitsPerMbit,
                      cfg.sbs.cache_size_mbit * kBitsPerMbit},
      DelayParams{},
      cfg.optimizer,
      TrialConfig{},
      cfg.sweep,
      cfg.geometry,
      cfg.to_json_text(),
      "",
  };
  exp.fingerprint = library_fingerprint(exp.library);

  DelayParams& p = exp.params;
  p.density_d2d_per_m2 = cfg.d2d.density_per_m2;
  p.radius_d2d_m = cfg.d2d.serving_radius_m;
  p.density_sbs_per_m2 = cfg.sbs.density_per_m2;
  p.radius_sbs_m = cfg.sbs.serving_radius_m;
  p.backhaul_rate_bps = cfg.rates.backhaul_mbit_s * kBitsPerMbit;
  if (cfg.rates.rate_model == "estimate") {
    SpectralEfficiencyOptions opt;
    opt.window_radius_m = cfg.geometry.window_radius_m;
    opt.min_distance_m = cfg.geometry.min_distance_m;
    auto estimate = [&](const TierConfig& tier, std::uint64_t stream) {
      Rng rng = Rng::stream(cfg.trials.seed, 0xE57 + stream);
      const auto se =
          mean_spectral_efficiency(tier, rng, cfg.rates.spectral_efficiency_samples, opt);
      return tier.bandwidth_hz * se.mean_bps_hz;
    };
    p.rate_d2d_bps = estimate(exp.d2d, 0);
    p.rate_sbs_bps = estimate(exp.sbs, 1);
    p.rate_mbs_bps = estimate(exp.mbs, 2);
  } else {
    p.rate_d2d_bps = cfg.rates.d2d_mbit_s * kBitsPerMbit;
    p.rate_sbs_bps = cfg.rates.sbs_mbit_s * kBitsPerMbit;
    p.rate_mbs_bps = cfg.rates.mbs_mbit_s * kBitsPerMbit;
  }
  p.validate();

  exp.trial.n_trials = cfg.trials.n_trials;
  exp.trial.seed = cfg.trials.seed;
  exp.trial.mode = delivery_mode_from_name(cfg.trials.mode);
  exp.trial.rate_model = rate_model_from_name(cfg.trials.rate_model);
  exp.trial.threads = 1;
  return exp;
}

}  // namespace svcache
