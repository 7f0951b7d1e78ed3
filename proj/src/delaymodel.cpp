#include "svcache/delaymodel.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace svcache {

namespace {
constexpr double kPi = std::numbers::pi;

// Per-bit cascade delay given the two survivor factors u = 1-h_d, v = 1-h_s.
double cascade_per_bit(double u, double v, const kernels::CascadeParams& cp) {
  const double c1 = cp.inv_rate_s - cp.inv_rate_d;
  const double c2 = cp.mbs_path - cp.inv_rate_s;
  return cp.inv_rate_d + u * (c1 + v * c2);
}

}  // namespace

double DelayParams::hit_exponent_d2d() const {
  return density_d2d_per_m2 * kPi * radius_d2d_m * radius_d2d_m;
}

double DelayParams::hit_exponent_sbs() const {
  return density_sbs_per_m2 * kPi * radius_sbs_m * radius_sbs_m;
}

void DelayParams::validate() const {
  for (double r : {rate_d2d_bps, rate_sbs_bps, rate_mbs_bps, backhaul_rate_bps}) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("all rates must be > 0");
  }
  if (!(density_d2d_per_m2 > 0.0) || !(density_sbs_per_m2 > 0.0)) {
    throw InvalidArgument("tier densities must be > 0");
  }
  if (!(radius_d2d_m > 0.0) || !(radius_sbs_m > 0.0)) {
    throw InvalidArgument("serving radii must be > 0");
  }
}

DelayModel::DelayModel(const VideoLibrary& lib, const DelayParams& params)
    : files_(lib.file_count()), layers_(lib.layers_per_file()), params_(params) {
  params_.validate();
  weights_.resize(files_ * layers_);
  sizes_.resize(files_ * layers_);
  std::size_t i = 0;
  for (std::size_t f = 1; f <= files_; ++f) {
    for (std::size_t l = 1; l <= layers_; ++l, ++i) {
      weights_[i] = lib.layer_request_prob(f, l);
      sizes_[i] = lib.layer_bits(f, l);
    }
  }
  cascade_ = kernels::CascadeParams{params_.hit_exponent_d2d(), params_.hit_exponent_sbs(),
                                    1.0 / params_.rate_d2d_bps, 1.0 / params_.rate_sbs_bps,
                                    params_.mbs_path_s_per_bit()};
}

void DelayModel::validate_placement(const RandomPlacement& placement) const {
  if (placement.d2d.rows() != files_ || placement.d2d.cols() != layers_ ||
      placement.sbs.rows() != files_ || placement.sbs.cols() != layers_) {
    throw InvalidArgument("placement dimensions do not match the library");
  }
  for (const Grid<double>* g : {&placement.d2d, &placement.sbs}) {
    for (double p : g->flat()) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidArgument("caching probabilities must lie in [0, 1]");
      }
    }
  }
}

double DelayModel::objective(const RandomPlacement& placement) const {
  validate_placement(placement);
  return objective_raw(placement.d2d.flat(), placement.sbs.flat());
}

double DelayModel::objective_raw(std::span<const double> pd, std::span<const double> ps) const {
  return kernels::active().cascade_objective(pd.data(), ps.data(), weights_.data(),
                                             sizes_.data(), weights_.size(), cascade_);
}

double DelayModel::objective_and_gradient(const RandomPlacement& placement, Grid<double>& gd,
                                          Grid<double>& gs) const {
  validate_placement(placement);
  if (!gd.same_shape(placement.d2d)) gd = Grid<double>(files_, layers_);
  if (!gs.same_shape(placement.sbs)) gs = Grid<double>(files_, layers_);
  return objective_and_gradient_raw(placement.d2d.flat(), placement.sbs.flat(), gd.flat(),
                                    gs.flat());
}

double DelayModel::objective_and_gradient_raw(std::span<const double> pd,
                                              std::span<const double> ps, std::span<double> gd,
                                              std::span<double> gs) const {
  return kernels::active().cascade_objective_grad(pd.data(), ps.data(), weights_.data(),
                                                  sizes_.data(), weights_.size(), cascade_,
                                                  gd.data(), gs.data());
}

ObjectiveValue DelayModel::breakdown(const RandomPlacement& placement) const {
  validate_placement(placement);
  ObjectiveValue out;
  out.per_layer.reserve(weights_.size());
  CompensatedSum total;
  std::size_t i = 0;
  for (std::size_t f = 1; f <= files_; ++f) {
    for (std::size_t l = 1; l <= layers_; ++l, ++i) {
      const double h_d = -std::expm1(-cascade_.a_d * placement.d2d[i]);
      const double h_s = -std::expm1(-cascade_.a_s * placement.sbs[i]);
      const double delay = sizes_[i] * cascade_per_bit(1.0 - h_d, 1.0 - h_s, cascade_);
      const double contribution = weights_[i] * delay;
      out.per_layer.push_back({f, l, weights_[i], h_d, h_s, delay, contribution});
      total.add(contribution);
    }
  }
  out.total_delay_s = total.value();
  return out;
}

double expected_layer_delay(std::size_t f, std::size_t l, const RandomPlacement& placement,
                            const VideoLibrary& lib, const DelayParams& params) {
  params.validate();
  validate_probability_grid(placement.d2d, lib);
  validate_probability_grid(placement.sbs, lib);
  if (f < 1 || f > lib.file_count() || l < 1 || l > lib.layers_per_file()) {
    throw InvalidArgument("layer index out of range");
  }
  const double u = std::exp(-params.hit_exponent_d2d() * placement.d2d(f - 1, l - 1));
  const double v = std::exp(-params.hit_exponent_sbs() * placement.sbs(f - 1, l - 1));
  const kernels::CascadeParams cp{params.hit_exponent_d2d(), params.hit_exponent_sbs(),
                                  1.0 / params.rate_d2d_bps, 1.0 / params.rate_sbs_bps,
                                  params.mbs_path_s_per_bit()};
  return lib.layer_bits(f, l) * cascade_per_bit(u, v, cp);
}

ObjectiveValue expected_total_delay(const RandomPlacement& placement, const VideoLibrary& lib,
                                    const DelayParams& params) {
  return DelayModel(lib, params).breakdown(placement);
}

void delay_gradient(const RandomPlacement& placement, const VideoLibrary& lib,
                    const DelayParams& params, Grid<double>& grad_d2d, Grid<double>& grad_sbs) {
  DelayModel(lib, params).objective_and_gradient(placement, grad_d2d, grad_sbs);
}

const char* baseline_policy_name(BaselinePolicy p) {
  switch (p) {
    case BaselinePolicy::no_cache: return "no_cache";
    case BaselinePolicy::mplp_svc: return "mplp_svc";
    case BaselinePolicy::mpcp_no_svc: return "mpcp_no_svc";
    case BaselinePolicy::binary_as_random: return "binary_as_random";
  }
  return "?";
}

double mpcp_no_svc_delay(const std::vector<std::uint8_t>& cached_d2d,
                         const std::vector<std::uint8_t>& cached_sbs, const VideoLibrary& lib,
                         const DelayParams& params) {
  params.validate();
  if (cached_d2d.size() != lib.file_count() || cached_sbs.size() != lib.file_count()) {
    throw InvalidArgument("cached-file indicator length mismatch");
  }
  const kernels::CascadeParams cp{params.hit_exponent_d2d(), params.hit_exponent_sbs(),
                                  1.0 / params.rate_d2d_bps, 1.0 / params.rate_sbs_bps,
                                  params.mbs_path_s_per_bit()};
  // Whole 50 Mbit file per request; quality preference plays no role without SVC.
  const double u_hit = std::exp(-cp.a_d);
  const double v_hit = std::exp(-cp.a_s);
  CompensatedSum total;
  for (std::size_t f = 1; f <= lib.file_count(); ++f) {
    const double u = cached_d2d[f - 1] ? u_hit : 1.0;
    const double v = cached_sbs[f - 1] ? v_hit : 1.0;
    total.add(lib.popularity(f) * lib.no_svc_file_bits() * cascade_per_bit(u, v, cp));
  }
  return total.value();
}

double baseline_delay(BaselinePolicy policy, const VideoLibrary& lib, const DelayParams& params,
                      const CacheCapacities& caps, const RandomPlacement* placement) {
  switch (policy) {
    case BaselinePolicy::no_cache:
      return expected_total_delay(zero_placement(lib), lib, params).total_delay_s;
    case BaselinePolicy::mplp_svc: {
      const auto d2d = mplp_place(lib, caps.d2d_bits, Tier::d2d);
      const auto sbs = mplp_place(lib, caps.sbs_bits, Tier::sbs);
      return expected_total_delay(binary_to_random(d2d, sbs), lib, params).total_delay_s;
    }
    case BaselinePolicy::mpcp_no_svc:
      return mpcp_no_svc_delay(mpcp_no_svc_place(lib, caps.d2d_bits),
                               mpcp_no_svc_place(lib, caps.sbs_bits), lib, params);
    case BaselinePolicy::binary_as_random:
      if (placement == nullptr) {
        throw InvalidArgument("binary_as_random requires a placement");
      }
      return expected_total_delay(*placement, lib, params).total_delay_s;
  }
  throw InvalidArgument("unknown baseline policy");
}

double fractional_delay(const FractionalPlacement& fractions, const VideoLibrary& lib,
                        const DelayParams& params) {
  params.validate();
  validate_probability_grid(fractions.d2d, lib);
  validate_probability_grid(fractions.sbs, lib);
  const double h_d = -std::expm1(-params.hit_exponent_d2d());
  const double h_s = -std::expm1(-params.hit_exponent_sbs());
  const double path = params.mbs_path_s_per_bit();
  CompensatedSum total;
  for (std::size_t f = 1; f <= lib.file_count(); ++f) {
    for (std::size_t l = 1; l <= lib.layers_per_file(); ++l) {
      const double s = lib.layer_bits(f, l);
      const double x_d = fractions.d2d(f - 1, l - 1);
      const double x_s = fractions.sbs(f - 1, l - 1);
      const double at_d2d = x_d * s / params.rate_d2d_bps + (1.0 - x_d) * s * path;
      const double at_sbs = x_s * s / params.rate_sbs_bps + (1.0 - x_s) * s * path;
      const double delay =
          h_d * at_d2d + (1.0 - h_d) * (h_s * at_sbs + (1.0 - h_s) * s * path);
      total.add(lib.layer_request_prob(f, l) * delay);
    }
  }
  return total.value();
}

std::string breakdown_to_csv(const ObjectiveValue& value) {
  std::ostringstream os;
  os << "file,layer,request_prob,h_d,h_s,delay_contribution\n";
  auto num = [](double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
  };
  for (const auto& row : value.per_layer) {
    os << row.file << ',' << row.layer << ',' << num(row.request_prob) << ',' << num(row.h_d2d)
       << ',' << num(row.h_sbs) << ',' << num(row.contribution_s) << '\n';
  }
  return os.str();
}

}  // namespace svcache
