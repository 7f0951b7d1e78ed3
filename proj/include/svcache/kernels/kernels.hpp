#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace svcache::kernels {

/// Constants of the three-tier delivery cascade, shared by every (file, layer) entry.
///   a_d, a_s            hit-probability exponents per unit caching probability
///                       (tier density * pi * serving-radius^2)
///   inv_rate_d, inv_rate_s   per-bit downlink delay of the D2D and SBS tiers, s/bit
///   mbs_path            per-bit delay of the miss path (MBS downlink + backhaul), s/bit
struct CascadeParams {
  double a_d;
  double a_s;
  double inv_rate_d;
  double inv_rate_s;
  double mbs_path;
};

/// One self-consistent set of kernel entry points. `scalar` is the reference
/// implementation; other variants must match it within the tolerances asserted
/// by the equivalence tests.
struct KernelOps {
  const char* name;

  /// out[i] = exp(-x[i]); x[i] >= 0.
  void (*exp_neg)(const double* x, double* out, std::size_t n);

  /// Sum over i of w[i]*sz[i]*D_i where D_i is the per-bit cascade delay at
  /// caching probabilities (pd[i], ps[i]).
  double (*cascade_objective)(const double* pd, const double* ps, const double* w,
                              const double* sz, std::size_t n, const CascadeParams& cp);

  /// Same sum; additionally writes the partial derivatives with respect to
  /// pd[i] and ps[i] into gd/gs.
  double (*cascade_objective_grad)(const double* pd, const double* ps, const double* w,
                                   const double* sz, std::size_t n, const CascadeParams& cp,
                                   double* gd, double* gs);

  /// Sum over i of h[i] * max(dist2[i], dmin2)^-2 (pathloss exponent 4).
  double (*interference_sum_pl4)(const double* dist2, const double* h, std::size_t n,
                                 double dmin2);
};

const KernelOps& scalar_ops();

/// Variants usable on this machine (scalar always; avx2 when compiled in and
/// the CPU supports AVX2+FMA).
std::vector<const KernelOps*> available_ops();

/// Select by name: "scalar", "avx2", or "auto" (best available). Throws on an
/// unknown or unavailable name. The SVC_CACHE_KERNEL environment variable, if
/// set, provides the initial selection.
void select(std::string_view name);

const KernelOps& active();

}  // namespace svcache::kernels
