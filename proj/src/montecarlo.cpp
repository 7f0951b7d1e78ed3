#include "svcache/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <thread>

#include "svcache/kernels/kernels.hpp"

namespace svcache {

const char* delivery_mode_name(DeliveryMode m) {
  switch (m) {
    case DeliveryMode::sequential: return "sequential";
    case DeliveryMode::parallel_ilt: return "parallel_ilt";
    case DeliveryMode::slt: return "slt";
  }
  return "?";
}

DeliveryMode delivery_mode_from_name(const std::string& name) {
  if (name == "sequential") return DeliveryMode::sequential;
  if (name == "parallel_ilt") return DeliveryMode::parallel_ilt;
  if (name == "slt") return DeliveryMode::slt;
  throw InvalidArgument("unknown delivery mode: " + name);
}

const char* rate_model_name(RateModel m) {
  return m == RateModel::fixed ? "fixed" : "sinr";
}

RateModel rate_model_from_name(const std::string& name) {
  if (name == "fixed") return RateModel::fixed;
  if (name == "sinr") return RateModel::sinr;
  throw InvalidArgument("unknown rate model: " + name);
}

McPolicy McPolicy::from_random(RandomPlacement placement) {
  McPolicy p;
  p.kind = Kind::layered;
  p.layered = std::move(placement);
  return p;
}

McPolicy McPolicy::from_whole_file(std::vector<std::uint8_t> d2d,
                                   std::vector<std::uint8_t> sbs) {
  McPolicy p;
  p.kind = Kind::whole_file;
  p.file_d2d = std::move(d2d);
  p.file_sbs = std::move(sbs);
  return p;
}

double link_delay_s(double bits, const TierConfig& tier, double distance_m, double fading,
                    double interference_w, double min_distance_m) {
  const double d = std::max(distance_m, min_distance_m);
  const double serving = tier.tx_power_w * fading * pathloss_gain(d, tier.pathloss_exponent);
  const double snr = serving / (interference_w + tier.noise_power_w);
  return bits / (tier.bandwidth_hz * std::log2(1.0 + snr));
}

namespace {

struct TierView {
  const PointSet* points = nullptr;
  const TierConfig* config = nullptr;
  // Nodes inside the serving radius, sorted by distance.
  std::vector<std::size_t> eligible;
  std::vector<double> eligible_dist2;
  std::vector<double> all_dist2;  // per point, for interference
};

TierView make_view(const PointSet& pts, const TierConfig& cfg) {
  TierView view;
  view.points = &pts;
  view.config = &cfg;
  view.all_dist2.reserve(pts.size());
  const double r2 = std::isfinite(cfg.serving_radius_m)
                        ? cfg.serving_radius_m * cfg.serving_radius_m
                        : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d2 = pts.x[i] * pts.x[i] + pts.y[i] * pts.y[i];
    view.all_dist2.push_back(d2);
    if (d2 <= r2) view.eligible.push_back(i);
  }
  std::sort(view.eligible.begin(), view.eligible.end(),
            [&](std::size_t a, std::size_t b) { return view.all_dist2[a] < view.all_dist2[b]; });
  for (std::size_t i : view.eligible) view.eligible_dist2.push_back(view.all_dist2[i]);
  return view;
}

// Fresh interferer fading per delivery; the serving node is excluded.
double sampled_interference(const TierView& view, std::size_t serving_index, double dmin,
                            Rng& rng, std::vector<double>& d2_scratch,
                            std::vector<double>& h_scratch) {
  d2_scratch.clear();
  h_scratch.clear();
  for (std::size_t i = 0; i < view.all_dist2.size(); ++i) {
    if (i == serving_index) continue;
    d2_scratch.push_back(view.all_dist2[i]);
    h_scratch.push_back(rng.exponential());
  }
  if (d2_scratch.empty()) return 0.0;
  const double dmin2 = dmin * dmin;
  if (view.config->pathloss_exponent == 4.0) {
    return view.config->tx_power_w *
           kernels::active().interference_sum_pl4(d2_scratch.data(), h_scratch.data(),
                                                  d2_scratch.size(), dmin2);
  }
  CompensatedSum acc;
  for (std::size_t i = 0; i < d2_scratch.size(); ++i) {
    const double d = std::sqrt(std::max(d2_scratch[i], dmin2));
    acc.add(h_scratch[i] * pathloss_gain(d, view.config->pathloss_exponent));
  }
  return view.config->tx_power_w * acc.value();
}

struct Delivery {
  Tier tier;
  std::size_t node_index = 0;  // within the tier's point set; unused for fixed-rate
  double dist2 = 0.0;
};

class TrialContext {
 public:
  TrialContext(const NetworkRealization& nr, const McEnvironment& env, RateModel rate_model,
               Rng& rng)
      : env_(env),
        rate_model_(rate_model),
        rng_(rng),
        d2d_(make_view(nr.d2d, env.d2d)),
        sbs_(make_view(nr.sbs, env.sbs)),
        mbs_(make_view(nr.mbs, env.mbs)) {}

  const TierView& d2d() const { return d2d_; }
  const TierView& sbs() const { return sbs_; }

  double deliver(double bits, const Delivery& where) {
    if (rate_model_ == RateModel::fixed) {
      switch (where.tier) {
        case Tier::d2d: return bits / env_.params.rate_d2d_bps;
        case Tier::sbs: return bits / env_.params.rate_sbs_bps;
        case Tier::mbs:
          return bits / env_.params.rate_mbs_bps + bits / env_.params.backhaul_rate_bps;
      }
    }
    const TierView& view = where.tier == Tier::d2d ? d2d_ : where.tier == Tier::sbs ? sbs_ : mbs_;
    const double fading = rng_.exponential();
    const double interference =
        sampled_interference(view, where.node_index, env_.min_distance_m, rng_, d2_scratch_,
                             h_scratch_);
    double delay = link_delay_s(bits, *view.config, std::sqrt(where.dist2), fading, interference,
                                env_.min_distance_m);
    if (where.tier == Tier::mbs) delay += bits / env_.params.backhaul_rate_bps;
    return delay;
  }

  Delivery mbs_delivery() const {
    if (rate_model_ == RateModel::sinr) {
      if (mbs_.points->size() == 0) {
        throw InvalidArgument("SINR-mode trial requires at least one MBS in the realization");
      }
      // Point 0 is the nearest MBS by construction of sample_realization.
      return Delivery{Tier::mbs, 0, mbs_.all_dist2[0]};
    }
    return Delivery{Tier::mbs, 0, 0.0};
  }

 private:
  const McEnvironment& env_;
  RateModel rate_model_;
  Rng& rng_;
  TierView d2d_, sbs_, mbs_;
  std::vector<double> d2_scratch_;
  std::vector<double> h_scratch_;
};

// First eligible node (distance order) whose cache mask covers `need`.
bool find_server(const TierView& view, const std::vector<std::uint32_t>& masks,
                 std::uint32_t need, Delivery& out, Tier tier) {
  for (std::size_t k = 0; k < view.eligible.size(); ++k) {
    const std::size_t i = view.eligible[k];
    if ((masks[i] & need) == need) {
      out = Delivery{tier, i, view.eligible_dist2[k]};
      return true;
    }
  }
  return false;
}

}  // namespace

double run_trial(const NetworkRealization& nr, const TrialCaches& caches, Request request,
                 const McEnvironment& env, DeliveryMode mode, RateModel rate_model, Rng& rng) {
  const VideoLibrary& lib = *env.library;
  if (request.file < 1 || request.file > lib.file_count() || request.quality < 1 ||
      request.quality > lib.layers_per_file()) {
    throw InvalidArgument("request indices out of range");
  }
  if (caches.d2d.size() != nr.d2d.size() || caches.sbs.size() != nr.sbs.size()) {
    throw InvalidArgument("cache contents do not match the realization");
  }

  TrialContext ctx(nr, env, rate_model, rng);

  auto cascade_server = [&](std::uint32_t need) {
    Delivery where{Tier::mbs, 0, 0.0};
    if (!find_server(ctx.d2d(), caches.d2d, need, where, Tier::d2d) &&
        !find_server(ctx.sbs(), caches.sbs, need, where, Tier::sbs)) {
      where = ctx.mbs_delivery();
    }
    return where;
  };

  if (mode == DeliveryMode::slt) {
    // The super layer is present at a node only when all of layers 1..q are.
    const std::uint32_t need = (request.quality >= 32)
                                   ? ~std::uint32_t{0}
                                   : ((std::uint32_t{1} << request.quality) - 1);
    const double sl_bits = lib.super_layer(request.file, request.quality).bits;
    return ctx.deliver(sl_bits, cascade_server(need));
  }

  double sum = 0.0;
  double worst = 0.0;
  for (std::size_t l = 1; l <= request.quality; ++l) {
    const double delay =
        ctx.deliver(lib.layer_bits(request.file, l), cascade_server(std::uint32_t{1} << (l - 1)));
    sum += delay;
    worst = std::max(worst, delay);
  }
  return mode == DeliveryMode::sequential ? sum : worst;
}

namespace {

struct RequestSampler {
  std::vector<double> pop_cdf;
  std::vector<double> pref_cdf;

  explicit RequestSampler(const VideoLibrary& lib) {
    double acc = 0.0;
    for (std::size_t f = 1; f <= lib.file_count(); ++f) {
      acc += lib.popularity(f);
      pop_cdf.push_back(acc);
    }
    pop_cdf.back() = 1.0;
    acc = 0.0;
    for (std::size_t q = 1; q <= lib.layers_per_file(); ++q) {
      acc += lib.preference().pmf(q);
      pref_cdf.push_back(acc);
    }
    pref_cdf.back() = 1.0;
  }

  std::size_t draw(const std::vector<double>& cdf, Rng& rng) const {
    const double u = rng.u01();
    return static_cast<std::size_t>(
               std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()) +
           1;
  }
};

// Streams per trial: 2i for topology, 2i+1 for request/cache/fading draws.
std::uint64_t topo_stream(std::size_t trial) { return 2 * static_cast<std::uint64_t>(trial); }
std::uint64_t draw_stream(std::size_t trial) {
  return 2 * static_cast<std::uint64_t>(trial) + 1;
}

// Per-estimate precomputation. The whole-file baseline reuses the layered
// engine through a one-file one-layer pseudo-library of the no-SVC size.
struct PreparedPolicy {
  const McPolicy* policy;
  std::optional<VideoLibrary> whole_lib;
  McEnvironment whole_env;

  PreparedPolicy(const McEnvironment& env, const McPolicy& p) : policy(&p) {
    if (p.kind == McPolicy::Kind::whole_file) {
      whole_lib.emplace(Grid<double>(1, 1, env.library->no_svc_file_bits()),
                        env.library->no_svc_file_bits(), PopularityModel{0.0, 0.0},
                        QualityPreference({1.0}));
      whole_env = env;
      whole_env.library = &*whole_lib;
    }
  }
};

double one_trial(const McEnvironment& env, const PreparedPolicy& prepared,
                 const RequestSampler& sampler, const TrialConfig& tc, std::size_t trial) {
  const McPolicy& policy = *prepared.policy;
  Rng rng = Rng::stream(tc.seed, draw_stream(trial));

  NetworkRealization nr;
  if (tc.rate_model == RateModel::sinr) {
    nr = sample_realization(env.d2d, env.sbs, env.mbs, env.window_radius_m,
                            splitmix64(tc.seed) + topo_stream(trial));
  } else {
    // Fixed per-tier rates: only nodes inside the serving radii matter.
    Rng topo = Rng::stream(tc.seed, topo_stream(trial));
    nr.window_radius_m = env.window_radius_m;
    nr.d2d = sample_ppp(env.d2d.density_per_m2, env.d2d.serving_radius_m, topo);
    nr.sbs = sample_ppp(env.sbs.density_per_m2, env.sbs.serving_radius_m, topo);
  }

  const std::size_t file = sampler.draw(sampler.pop_cdf, rng);

  if (policy.kind == McPolicy::Kind::whole_file) {
    // No SVC: the whole file is fetched in one stream; quality plays no role.
    TrialCaches caches;
    caches.d2d.assign(nr.d2d.size(), policy.file_d2d[file - 1] ? 1u : 0u);
    caches.sbs.assign(nr.sbs.size(), policy.file_sbs[file - 1] ? 1u : 0u);
    return run_trial(nr, caches, Request{1, 1}, prepared.whole_env, DeliveryMode::sequential,
                     tc.rate_model, rng);
  }

  const std::size_t quality = sampler.draw(sampler.pref_cdf, rng);

  // Bernoulli cache contents for the requested file's layers, eligible nodes only.
  TrialCaches caches;
  caches.d2d.assign(nr.d2d.size(), 0);
  caches.sbs.assign(nr.sbs.size(), 0);
  auto fill_masks = [&](const PointSet& pts, const TierConfig& cfg, const Grid<double>& probs,
                        std::vector<std::uint32_t>& masks) {
    const double r2 = std::isfinite(cfg.serving_radius_m)
                          ? cfg.serving_radius_m * cfg.serving_radius_m
                          : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts.x[i] * pts.x[i] + pts.y[i] * pts.y[i] > r2) continue;
      std::uint32_t mask = 0;
      for (std::size_t l = 1; l <= quality; ++l) {
        if (rng.bernoulli(probs(file - 1, l - 1))) mask |= std::uint32_t{1} << (l - 1);
      }
      masks[i] = mask;
    }
  };
  fill_masks(nr.d2d, env.d2d, policy.layered.d2d, caches.d2d);
  fill_masks(nr.sbs, env.sbs, policy.layered.sbs, caches.sbs);

  return run_trial(nr, caches, Request{file, quality}, env, tc.mode, tc.rate_model, rng);
}

}  // namespace

DelayEstimate estimate_delay(const McEnvironment& env, const McPolicy& policy,
                             const TrialConfig& tc) {
  if (env.library == nullptr) throw InvalidArgument("environment needs a library");
  if (tc.n_trials < 1) throw InvalidArgument("n_trials must be >= 1");
  if (policy.kind == McPolicy::Kind::layered) {
    validate_probability_grid(policy.layered.d2d, *env.library);
    validate_probability_grid(policy.layered.sbs, *env.library);
  } else if (policy.file_d2d.size() != env.library->file_count() ||
             policy.file_sbs.size() != env.library->file_count()) {
    throw InvalidArgument("cached-file indicator length mismatch");
  }
  env.params.validate();

  const RequestSampler sampler(*env.library);
  const PreparedPolicy prepared(env, policy);
  const std::size_t chunk = 4096;
  const std::size_t n_chunks = (tc.n_trials + chunk - 1) / chunk;
  struct ChunkSums {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  std::vector<ChunkSums> partial(n_chunks);

  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(begin + chunk, tc.n_trials);
    CompensatedSum s, s2;
    for (std::size_t i = begin; i < end; ++i) {
      const double d = one_trial(env, prepared, sampler, tc, i);
      s.add(d);
      s2.add(d * d);
    }
    partial[c] = ChunkSums{s.value(), s2.value()};
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(tc.threads, n_chunks));
  if (threads == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t c = next.fetch_add(1);
          if (c >= n_chunks) return;
          run_chunk(c);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  // Merge in chunk order so the estimate is independent of scheduling.
  CompensatedSum sum, sum_sq;
  for (const auto& c : partial) {
    sum.add(c.sum);
    sum_sq.add(c.sum_sq);
  }

  DelayEstimate est;
  est.n_trials = tc.n_trials;
  const double n = static_cast<double>(tc.n_trials);
  est.mean_s = sum.value() / n;
  if (tc.n_trials > 1) {
    const double var = std::max(0.0, (sum_sq.value() - n * est.mean_s * est.mean_s) / (n - 1.0));
    est.std_error_s = std::sqrt(var / n);
  } else {
    est.degenerate = true;
  }
  est.ci95_halfwidth_s = 1.96 * est.std_error_s;
  return est;
}

const char* sweep_axis_name(SweepAxis a) {
  return a == SweepAxis::backhaul_rate ? "backhaul_rate" : "sbs_cache_size";
}

std::vector<SweepRow> sweep(const McEnvironment& base_env, const CacheCapacities& base_caps,
                            const OptimizerConfig& opt_config, SweepAxis axis,
                            std::span<const double> grid, const TrialConfig& tc) {
  if (grid.empty()) throw InvalidArgument("sweep grid must be non-empty");
  const VideoLibrary& lib = *base_env.library;
  std::vector<double> values(grid.begin(), grid.end());
  std::sort(values.begin(), values.end());

  std::vector<SweepRow> rows;
  for (std::size_t gi = 0; gi < values.size(); ++gi) {
    const double value = values[gi];
    McEnvironment env = base_env;
    CacheCapacities caps = base_caps;
    if (axis == SweepAxis::backhaul_rate) {
      if (!(value > 0.0)) throw InvalidArgument("backhaul rate must be > 0");
      env.params.backhaul_rate_bps = value * kBitsPerMbit;
    } else {
      if (value < 0.0) throw InvalidArgument("cache size must be >= 0");
      caps.sbs_bits = value * kBitsPerMbit;
    }

    struct Entry {
      std::string policy;
      double analytic = 0.0;
      McPolicy mc_policy;
    };
    std::vector<Entry> entries;

    entries.push_back({"no_cache",
                       expected_total_delay(zero_placement(lib), lib, env.params).total_delay_s,
                       McPolicy::from_random(zero_placement(lib))});

    auto mpcp_d = mpcp_no_svc_place(lib, caps.d2d_bits);
    auto mpcp_s = mpcp_no_svc_place(lib, caps.sbs_bits);
    entries.push_back({"mpcp_no_svc", mpcp_no_svc_delay(mpcp_d, mpcp_s, lib, env.params),
                       McPolicy::from_whole_file(std::move(mpcp_d), std::move(mpcp_s))});

    auto mplp = binary_to_random(mplp_place(lib, caps.d2d_bits, Tier::d2d),
                                 mplp_place(lib, caps.sbs_bits, Tier::sbs));
    entries.push_back({"mplp_svc", expected_total_delay(mplp, lib, env.params).total_delay_s,
                       McPolicy::from_random(std::move(mplp))});

    auto [optimized, trace] = gradient_projection(lib, env.params, caps, opt_config);
    entries.push_back({"random_svc",
                       expected_total_delay(optimized, lib, env.params).total_delay_s,
                       McPolicy::from_random(std::move(optimized))});

    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.policy < b.policy; });

    for (std::size_t pi = 0; pi < entries.size(); ++pi) {
      TrialConfig row_tc = tc;
      row_tc.seed = splitmix64(tc.seed) + 0x9E3779B97F4A7C15ULL * (gi * 16 + pi + 1);
      const DelayEstimate est = estimate_delay(env, entries[pi].mc_policy, row_tc);
      rows.push_back({sweep_axis_name(axis), value, entries[pi].policy,
                      delivery_mode_name(tc.mode), entries[pi].analytic, est.mean_s,
                      est.std_error_s, est.n_trials, row_tc.seed});
    }
  }
  return rows;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << "axis_name,axis_value,policy,mode,analytic_delay_s,mc_delay_s,mc_stderr_s,n_trials,"
        "seed\n";
  auto num = [](double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
  };
  for (const auto& r : rows) {
    os << r.axis_name << ',' << num(r.axis_value) << ',' << r.policy << ',' << r.mode << ','
       << num(r.analytic_delay_s) << ',' << num(r.mc_delay_s) << ',' << num(r.mc_stderr_s) << ','
       << r.n_trials << ',' << r.seed << '\n';
  }
  return os.str();
}

}  // namespace svcache
