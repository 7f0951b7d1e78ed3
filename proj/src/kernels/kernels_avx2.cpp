// AVX2+FMA kernel variants. Compiled with -mavx2 -mfma; selected at runtime
// only when the CPU reports both features.
//
// exp is the classic Cephes rational approximation (range reduction by log2(e),
// P/Q in the reduced interval, exponent reassembly through the bit pattern).
// Agreement with libm exp is a few ulp; the equivalence suite pins the bound.

#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "svcache/kernels/kernels.hpp"

namespace svcache::kernels {
namespace {

constexpr double kExpClamp = 708.0;

inline __m256d vexp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
  const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
  const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
  const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
  const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
  const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
  const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);

  x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-kExpClamp)), _mm256_set1_pd(kExpClamp));

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);
  const __m256d r2 = _mm256_mul_pd(r, r);

  __m256d px = _mm256_fmadd_pd(p0, r2, p1);
  px = _mm256_fmadd_pd(px, r2, p2);
  px = _mm256_mul_pd(px, r);
  __m256d qx = _mm256_fmadd_pd(q0, r2, q1);
  qx = _mm256_fmadd_pd(qx, r2, q2);
  qx = _mm256_fmadd_pd(qx, r2, q3);

  const __m256d e = _mm256_fmadd_pd(two, _mm256_div_pd(px, _mm256_sub_pd(qx, px)), one);

  // 2^n via the exponent field; n is within [-1022, 1023] after the clamp.
  const __m128i n32 = _mm256_cvtpd_epi32(n);
  const __m256i n64 = _mm256_cvtepi32_epi64(n32);
  const __m256i bits = _mm256_add_epi64(_mm256_castpd_si256(e), _mm256_slli_epi64(n64, 52));
  return _mm256_castsi256_pd(bits);
}

inline double reduce_lanes(__m256d acc) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  return ((lane[0] + lane[1]) + lane[2]) + lane[3];
}

void exp_neg_avx2(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(out + i, vexp_pd(_mm256_sub_pd(_mm256_setzero_pd(), v)));
  }
  if (i < n) {
    alignas(32) double xin[4] = {0, 0, 0, 0};
    alignas(32) double xout[4];
    for (std::size_t k = i; k < n; ++k) xin[k - i] = x[k];
    _mm256_store_pd(xout, vexp_pd(_mm256_sub_pd(_mm256_setzero_pd(), _mm256_load_pd(xin))));
    for (std::size_t k = i; k < n; ++k) out[k] = xout[k - i];
  }
}

struct CascadeVec {
  __m256d neg_ad, neg_as, inv_rd, c1, c2;
  explicit CascadeVec(const CascadeParams& cp)
      : neg_ad(_mm256_set1_pd(-cp.a_d)),
        neg_as(_mm256_set1_pd(-cp.a_s)),
        inv_rd(_mm256_set1_pd(cp.inv_rate_d)),
        c1(_mm256_set1_pd(cp.inv_rate_s - cp.inv_rate_d)),
        c2(_mm256_set1_pd(cp.mbs_path - cp.inv_rate_s)) {}
};

double cascade_objective_avx2(const double* pd, const double* ps, const double* w,
                              const double* sz, std::size_t n, const CascadeParams& cp) {
  const CascadeVec c(cp);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d u = vexp_pd(_mm256_mul_pd(c.neg_ad, _mm256_loadu_pd(pd + i)));
    const __m256d v = vexp_pd(_mm256_mul_pd(c.neg_as, _mm256_loadu_pd(ps + i)));
    const __m256d ws = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(sz + i));
    const __m256d bracket = _mm256_fmadd_pd(v, c.c2, c.c1);
    const __m256d delay = _mm256_fmadd_pd(u, bracket, c.inv_rd);
    acc = _mm256_fmadd_pd(ws, delay, acc);
  }
  double total = reduce_lanes(acc);
  const double c1 = cp.inv_rate_s - cp.inv_rate_d;
  const double c2 = cp.mbs_path - cp.inv_rate_s;
  for (; i < n; ++i) {
    const double u = std::exp(-cp.a_d * pd[i]);
    const double v = std::exp(-cp.a_s * ps[i]);
    total += w[i] * sz[i] * (cp.inv_rate_d + u * (c1 + v * c2));
  }
  return total;
}

double cascade_objective_grad_avx2(const double* pd, const double* ps, const double* w,
                                   const double* sz, std::size_t n, const CascadeParams& cp,
                                   double* gd, double* gs) {
  const CascadeVec c(cp);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d u = vexp_pd(_mm256_mul_pd(c.neg_ad, _mm256_loadu_pd(pd + i)));
    const __m256d v = vexp_pd(_mm256_mul_pd(c.neg_as, _mm256_loadu_pd(ps + i)));
    const __m256d ws = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(sz + i));
    const __m256d bracket = _mm256_fmadd_pd(v, c.c2, c.c1);
    const __m256d uws = _mm256_mul_pd(u, ws);
    acc = _mm256_fmadd_pd(ws, _mm256_fmadd_pd(u, bracket, c.inv_rd), acc);
    _mm256_storeu_pd(gd + i, _mm256_mul_pd(c.neg_ad, _mm256_mul_pd(uws, bracket)));
    _mm256_storeu_pd(gs + i, _mm256_mul_pd(c.neg_as, _mm256_mul_pd(uws, _mm256_mul_pd(v, c.c2))));
  }
  double total = reduce_lanes(acc);
  const double c1 = cp.inv_rate_s - cp.inv_rate_d;
  const double c2 = cp.mbs_path - cp.inv_rate_s;
  for (; i < n; ++i) {
    const double u = std::exp(-cp.a_d * pd[i]);
    const double v = std::exp(-cp.a_s * ps[i]);
    const double ws = w[i] * sz[i];
    total += ws * (cp.inv_rate_d + u * (c1 + v * c2));
    gd[i] = -cp.a_d * u * ws * (c1 + v * c2);
    gs[i] = -cp.a_s * u * v * ws * c2;
  }
  return total;
}

double interference_sum_pl4_avx2(const double* dist2, const double* h, std::size_t n,
                                 double dmin2) {
  const __m256d dmin2v = _mm256_set1_pd(dmin2);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d2 = _mm256_max_pd(_mm256_loadu_pd(dist2 + i), dmin2v);
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_loadu_pd(h + i), _mm256_mul_pd(d2, d2)));
  }
  double total = reduce_lanes(acc);
  for (; i < n; ++i) {
    const double d2 = dist2[i] < dmin2 ? dmin2 : dist2[i];
    total += h[i] / (d2 * d2);
  }
  return total;
}

}  // namespace

const KernelOps& avx2_ops() {
  static const KernelOps ops{
      "avx2",
      exp_neg_avx2,
      cascade_objective_avx2,
      cascade_objective_grad_avx2,
      interference_sum_pl4_avx2,
  };
  return ops;
}

}  // namespace svcache::kernels
