// Reference kernels. Plain loops, libm exp, compensated reduction.

#include <cmath>

#include "svcache/common.hpp"
#include "svcache/kernels/kernels.hpp"

namespace svcache::kernels {
namespace {

void exp_neg_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(-x[i]);
}

double cascade_objective_scalar(const double* pd, const double* ps, const double* w,
                                const double* sz, std::size_t n, const CascadeParams& cp) {
  const double c1 = cp.inv_rate_s - cp.inv_rate_d;
  const double c2 = cp.mbs_path - cp.inv_rate_s;
  CompensatedSum acc;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::exp(-cp.a_d * pd[i]);
    const double v = std::exp(-cp.a_s * ps[i]);
    acc.add(w[i] * sz[i] * (cp.inv_rate_d + u * (c1 + v * c2)));
  }
  return acc.value();
}

double cascade_objective_grad_scalar(const double* pd, const double* ps, const double* w,
                                     const double* sz, std::size_t n, const CascadeParams& cp,
                                     double* gd, double* gs) {
  const double c1 = cp.inv_rate_s - cp.inv_rate_d;
  const double c2 = cp.mbs_path - cp.inv_rate_s;
  CompensatedSum acc;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::exp(-cp.a_d * pd[i]);
    const double v = std::exp(-cp.a_s * ps[i]);
    const double ws = w[i] * sz[i];
    acc.add(ws * (cp.inv_rate_d + u * (c1 + v * c2)));
    gd[i] = -cp.a_d * u * ws * (c1 + v * c2);
    gs[i] = -cp.a_s * u * v * ws * c2;
  }
  return acc.value();
}

double interference_sum_pl4_scalar(const double* dist2, const double* h, std::size_t n,
                                   double dmin2) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < n; ++i) {
    const double d2 = dist2[i] < dmin2 ? dmin2 : dist2[i];
    acc.add(h[i] / (d2 * d2));
  }
  return acc.value();
}

}  // namespace

const KernelOps& scalar_ops() {
  static const KernelOps ops{
      "scalar",
      exp_neg_scalar,
      cascade_objective_scalar,
      cascade_objective_grad_scalar,
      interference_sum_pl4_scalar,
  };
  return ops;
}

}  // namespace svcache::kernels
