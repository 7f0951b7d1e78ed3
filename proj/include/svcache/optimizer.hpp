#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "svcache/delaymodel.hpp"
#include "svcache/policy.hpp"

namespace svcache {

struct ArmijoParams {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1.0e-4;
};

struct OptimizerConfig {
  std::size_t max_iterations = 500;
  double tolerance_rel = 1.0e-8;  // relative objective change
  ArmijoParams armijo;
  double projection_tolerance_bits = 1.0e-3;

  void validate() const;
};

struct IterationRecord {
  std::size_t iteration = 0;
  double objective_s = 0.0;
  double step = 0.0;
  double grad_norm = 0.0;
  double slack_d2d_bits = 0.0;
  double slack_sbs_bits = 0.0;
  double wall_time_s = 0.0;  // in-memory diagnostic; the CSV export omits it
};

struct OptimizationTrace {
  std::vector<IterationRecord> records;
  bool converged = false;
  std::string stop_reason;
};

class OptimizerError : public std::runtime_error {
 public:
  OptimizerError(const std::string& what, OptimizationTrace trace)
      : std::runtime_error(what), trace(std::move(trace)) {}
  OptimizationTrace trace;
};

/// Euclidean projection onto {p : 0 <= p <= 1, sum(size * p) <= capacity}.
/// Returns clip(v, 0, 1) when that is already feasible; otherwise
/// clip(v - mu * size, 0, 1) with mu found by bisection until the occupancy
/// matches the capacity within tol_bits (or the bracket collapses, in which
/// case the feasible endpoint is returned).
Grid<double> project_capacity(const Grid<double>& v, const Grid<double>& sizes,
                              double capacity_bits, double tol_bits = 1.0e-3);

/// Projected gradient descent with Armijo backtracking over the per-tier
/// capacity polytopes. The objective trace is non-increasing; every iterate
/// stays feasible up to the projection tolerance.
std::pair<RandomPlacement, OptimizationTrace> gradient_projection(
    const VideoLibrary& lib, const DelayParams& params, const CacheCapacities& caps,
    const OptimizerConfig& config, const RandomPlacement& init);

/// Same, starting from the uniform expected-capacity-saturating point.
std::pair<RandomPlacement, OptimizationTrace> gradient_projection(
    const VideoLibrary& lib, const DelayParams& params, const CacheCapacities& caps,
    const OptimizerConfig& config);

std::string trace_to_csv(const OptimizationTrace& trace);

struct ComplexityProbeRow {
  std::size_t file_count = 0;
  std::size_t layers = 0;
  double seconds_per_gradient = 0.0;
};

/// Measures the per-iteration gradient-evaluation cost for each (F, L) pair.
std::vector<ComplexityProbeRow> complexity_probe(
    const std::vector<std::pair<std::size_t, std::size_t>>& shapes);

/// Least-squares slope of log(seconds) against log(F*L).
double complexity_loglog_slope(const std::vector<ComplexityProbeRow>& rows);

}  // namespace svcache
