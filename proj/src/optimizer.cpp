#include "svcache/optimizer.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>

namespace svcache {

void OptimizerConfig::validate() const {
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
  if (!(tolerance_rel > 0.0)) throw InvalidArgument("tolerance must be > 0");
  if (!(armijo.initial_step > 0.0)) throw InvalidArgument("initial step must be > 0");
  if (!(armijo.shrink > 0.0 && armijo.shrink < 1.0)) {
    throw InvalidArgument("shrink factor must lie in (0, 1)");
  }
  if (!(armijo.sufficient_decrease > 0.0 && armijo.sufficient_decrease < 1.0)) {
    throw InvalidArgument("sufficient-decrease constant must lie in (0, 1)");
  }
  if (!(projection_tolerance_bits > 0.0)) {
    throw InvalidArgument("projection tolerance must be > 0");
  }
}

namespace {

double clipped_occupancy(const Grid<double>& v, const Grid<double>& sizes, double mu,
                         Grid<double>& out) {
  CompensatedSum occ;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double p = std::clamp(v[i] - mu * sizes[i], 0.0, 1.0);
    out[i] = p;
    occ.add(p * sizes[i]);
  }
  return occ.value();
}

}  // namespace

Grid<double> project_capacity(const Grid<double>& v, const Grid<double>& sizes,
                              double capacity_bits, double tol_bits) {
  if (!v.same_shape(sizes)) throw InvalidArgument("value/size shape mismatch");
  if (capacity_bits < 0.0) throw InvalidArgument("capacity must be >= 0");
  for (double x : v.flat()) {
    if (!std::isfinite(x)) throw InvalidArgument("projection input must be finite");
  }

  Grid<double> p(v.rows(), v.cols());
  if (clipped_occupancy(v, sizes, 0.0, p) <= capacity_bits) return p;

  double mu_lo = 0.0;  // occupancy > capacity here
  double mu_hi = 0.0;  // occupancy <= capacity here
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (sizes[i] > 0.0) mu_hi = std::max(mu_hi, v[i] / sizes[i]);
  }
  Grid<double> hi_point(v.rows(), v.cols());
  clipped_occupancy(v, sizes, mu_hi, hi_point);

  for (int iter = 0; iter < 200; ++iter) {
    const double mu = 0.5 * (mu_lo + mu_hi);
    if (mu == mu_lo || mu == mu_hi) break;
    const double occ = clipped_occupancy(v, sizes, mu, p);
    if (std::abs(occ - capacity_bits) <= tol_bits) return p;
    if (occ > capacity_bits) {
      mu_lo = mu;
    } else {
      mu_hi = mu;
      hi_point = p;
    }
  }
  return hi_point;  // feasible endpoint of the collapsed bracket
}

namespace {

double dot(const Grid<double>& a, const Grid<double>& b) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

Grid<double> stepped(const Grid<double>& p, const Grid<double>& g, double t) {
  Grid<double> out(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] - t * g[i];
  return out;
}

Grid<double> minus(const Grid<double>& a, const Grid<double>& b) {
  Grid<double> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

bool all_finite(const Grid<double>& g) {
  for (double x : g.flat()) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

std::pair<RandomPlacement, OptimizationTrace> gradient_projection(
    const VideoLibrary& lib, const DelayParams& params, const CacheCapacities& caps,
    const OptimizerConfig& config, const RandomPlacement& init) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  validate_probability_grid(init.d2d, lib);
  validate_probability_grid(init.sbs, lib);
  const Grid<double>& sizes = lib.layer_bits_grid();
  const double tol = config.projection_tolerance_bits;
  if (check_feasibility(init.d2d, lib, caps.d2d_bits).slack_bits < -tol ||
      check_feasibility(init.sbs, lib, caps.sbs_bits).slack_bits < -tol) {
    throw InvalidArgument("initial placement violates the capacity constraints");
  }

  DelayModel model(lib, params);
  RandomPlacement p = init;
  Grid<double> gd(p.d2d.rows(), p.d2d.cols());
  Grid<double> gs(p.sbs.rows(), p.sbs.cols());

  OptimizationTrace trace;
  double f_cur = model.objective(p);

  auto record = [&](std::size_t it, double step, double grad_norm) {
    trace.records.push_back({it, f_cur, step, grad_norm,
                             check_feasibility(p.d2d, lib, caps.d2d_bits).slack_bits,
                             check_feasibility(p.sbs, lib, caps.sbs_bits).slack_bits,
                             elapsed()});
  };

  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    const double f = model.objective_and_gradient(p, gd, gs);
    if (!std::isfinite(f) || !all_finite(gd) || !all_finite(gs)) {
      trace.stop_reason = "non-finite objective or gradient";
      throw OptimizerError("gradient projection aborted: non-finite values", std::move(trace));
    }
    const double grad_norm = std::sqrt(dot(gd, gd) + dot(gs, gs));

    double t = config.armijo.initial_step;
    bool accepted = false;
    RandomPlacement cand;
    double f_cand = f;
    for (int bt = 0; bt < 80; ++bt) {
      cand.d2d = project_capacity(stepped(p.d2d, gd, t), sizes, caps.d2d_bits, tol);
      cand.sbs = project_capacity(stepped(p.sbs, gs, t), sizes, caps.sbs_bits, tol);
      f_cand = model.objective_raw(cand.d2d.flat(), cand.sbs.flat());
      const double dir = dot(gd, minus(cand.d2d, p.d2d)) + dot(gs, minus(cand.sbs, p.sbs));
      if (f_cand <= f + config.armijo.sufficient_decrease * dir) {
        accepted = true;
        break;
      }
      t *= config.armijo.shrink;
    }
    if (!accepted) {
      trace.converged = true;
      trace.stop_reason = "no further descent step found";
      break;
    }

    const double rel_change = (f - f_cand) / std::max(std::abs(f), 1e-300);
    p = std::move(cand);
    f_cur = f_cand;
    record(it, t, grad_norm);
    if (rel_change < config.tolerance_rel) {
      trace.converged = true;
      trace.stop_reason = "relative objective change below tolerance";
      break;
    }
  }
  if (trace.stop_reason.empty()) {
    trace.stop_reason = "iteration limit reached";
  }
  return {std::move(p), std::move(trace)};
}

std::pair<RandomPlacement, OptimizationTrace> gradient_projection(
    const VideoLibrary& lib, const DelayParams& params, const CacheCapacities& caps,
    const OptimizerConfig& config) {
  return gradient_projection(lib, params, caps, config, uniform_placement(lib, caps));
}

std::string trace_to_csv(const OptimizationTrace& trace) {
  std::ostringstream os;
  os << "iteration,objective_s,step,grad_norm,slack_d2d_bits,slack_sbs_bits\n";
  auto num = [](double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
  };
  for (const auto& r : trace.records) {
    os << r.iteration << ',' << num(r.objective_s) << ',' << num(r.step) << ','
       << num(r.grad_norm) << ',' << num(r.slack_d2d_bits) << ',' << num(r.slack_sbs_bits)
       << '\n';
  }
  return os.str();
}

std::vector<ComplexityProbeRow> complexity_probe(
    const std::vector<std::pair<std::size_t, std::size_t>>& shapes) {
  using clock = std::chrono::steady_clock;
  std::vector<ComplexityProbeRow> rows;
  rows.reserve(shapes.size());
  for (const auto& [F, L] : shapes) {
    LibraryConfig lc;
    lc.file_count = F;
    lc.layers_per_file = L;
    const VideoLibrary lib = build_library(lc);
    DelayParams params;
    DelayModel model(lib, params);
    const RandomPlacement p =
        uniform_placement(lib, CacheCapacities{200.0 * kBitsPerMbit, 500.0 * kBitsPerMbit});
    std::vector<double> gd(F * L), gs(F * L);

    auto run_once = [&](std::size_t reps) {
      const auto t0 = clock::now();
      double sink = 0.0;
      for (std::size_t i = 0; i < reps; ++i) {
        sink += model.objective_and_gradient_raw(p.d2d.flat(), p.sbs.flat(), gd, gs);
      }
      const double dt = std::chrono::duration<double>(clock::now() - t0).count();
      // keep the accumulated objective alive so the loop is not elided
      return sink == -1.0 ? dt + 1.0 : dt;
    };

    std::size_t reps = 1;
    run_once(1);  // warm-up
    while (run_once(reps) < 4.0e-3) reps *= 2;
    std::vector<double> samples;
    for (int k = 0; k < 5; ++k) samples.push_back(run_once(reps) / static_cast<double>(reps));
    std::sort(samples.begin(), samples.end());
    rows.push_back({F, L, samples[samples.size() / 2]});
  }
  return rows;
}

double complexity_loglog_slope(const std::vector<ComplexityProbeRow>& rows) {
  if (rows.size() < 2) throw InvalidArgument("need at least two probe rows");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    const double x = std::log(static_cast<double>(r.file_count * r.layers));
    const double y = std::log(r.seconds_per_gradient);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace svcache
