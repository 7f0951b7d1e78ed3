#include "svcache/content.hpp"

#include <cmath>
#include <string>

namespace svcache {

namespace {

void require_finite_nonneg(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw InvalidArgument(std::string(name) + " must be finite and nonnegative");
  }
}

}  // namespace

std::vector<double> mz_pmf(std::size_t file_count, double alpha, double plateau) {
  if (file_count == 0) throw InvalidArgument("file_count must be >= 1");
  require_finite_nonneg(alpha, "alpha");
  require_finite_nonneg(plateau, "plateau");

  std::vector<double> pmf(file_count);
  CompensatedSum norm;
  for (std::size_t f = 1; f <= file_count; ++f) {
    const double w = std::pow(static_cast<double>(f) + plateau, -alpha);
    pmf[f - 1] = w;
    norm.add(w);
  }
  const double inv = 1.0 / norm.value();
  for (double& p : pmf) p *= inv;
  return pmf;
}

QualityPreference::QualityPreference(std::vector<double> pmf) : pmf_(std::move(pmf)) {
  if (pmf_.empty()) throw InvalidArgument("preference pmf must be non-empty");
  CompensatedSum total;
  for (double p : pmf_) {
    if (!std::isfinite(p) || p < 0.0) throw InvalidArgument("preference pmf entries must be >= 0");
    total.add(p);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw InvalidArgument("preference pmf must sum to 1 within 1e-12");
  }
  tail_.resize(pmf_.size());
  double acc = 0.0;
  for (std::size_t i = pmf_.size(); i-- > 0;) {
    acc += pmf_[i];
    tail_[i] = std::min(acc, 1.0);
  }
  for (std::size_t q = 1; q <= pmf_.size(); ++q) mean_ += static_cast<double>(q) * pmf_[q - 1];
}

QualityPreference QualityPreference::truncated_geometric(std::size_t levels, double rho) {
  if (levels == 0) throw InvalidArgument("levels must be >= 1");
  if (!std::isfinite(rho) || rho <= 0.0) throw InvalidArgument("rho must be positive");
  std::vector<double> pmf(levels);
  double w = 1.0;
  double sum = 0.0;
  for (std::size_t q = 0; q < levels; ++q) {
    pmf[q] = w;
    sum += w;
    w *= rho;
  }
  for (double& p : pmf) p /= sum;
  return QualityPreference(std::move(pmf));
}

VideoLibrary::VideoLibrary(Grid<double> layer_bits, double no_svc_file_bits,
                           PopularityModel popularity, QualityPreference preference)
    : layer_bits_(std::move(layer_bits)),
      no_svc_file_bits_(no_svc_file_bits),
      popularity_params_(popularity),
      popularity_(mz_pmf(layer_bits_.rows(), popularity.alpha, popularity.plateau)),
      preference_(std::move(preference)) {
  if (layer_bits_.rows() == 0 || layer_bits_.cols() == 0) {
    throw InvalidArgument("library needs at least one file and one layer");
  }
  for (double b : layer_bits_.flat()) {
    if (!std::isfinite(b) || b <= 0.0) throw InvalidArgument("every layer size must be > 0");
  }
  if (!(no_svc_file_bits_ > 0.0)) throw InvalidArgument("no-SVC file size must be > 0");
  if (preference_.levels() != layer_bits_.cols()) {
    throw InvalidArgument("preference levels must equal layers_per_file");
  }
}

void VideoLibrary::check_indices(std::size_t f, std::size_t l) const {
  if (f < 1 || f > file_count()) throw InvalidArgument("file index out of range");
  if (l < 1 || l > layers_per_file()) throw InvalidArgument("layer index out of range");
}

double VideoLibrary::layer_request_prob(std::size_t f, std::size_t l) const {
  check_indices(f, l);
  return popularity_[f - 1] * preference_.tail(l);
}

SuperLayer VideoLibrary::super_layer(std::size_t f, std::size_t q) const {
  check_indices(f, q);
  CompensatedSum bits;
  for (std::size_t l = 1; l <= q; ++l) bits.add(layer_bits_(f - 1, l - 1));
  return SuperLayer{f, q, bits.value()};
}

double VideoLibrary::mean_request_bits() const {
  CompensatedSum total;
  for (std::size_t f = 1; f <= file_count(); ++f) {
    for (std::size_t l = 1; l <= layers_per_file(); ++l) {
      total.add(layer_request_prob(f, l) * layer_bits(f, l));
    }
  }
  return total.value();
}

VideoLibrary build_library(const LibraryConfig& config) {
  if (config.file_count == 0 || config.layers_per_file == 0) {
    throw InvalidArgument("file_count and layers_per_file must be >= 1");
  }
  if (!(config.base_size_mbit > 0.0)) throw InvalidArgument("base_size_mbit must be > 0");
  if (!std::isfinite(config.svc_overhead) || config.svc_overhead < 0.0) {
    throw InvalidArgument("svc_overhead must be >= 0");
  }
  const double svc_total_bits = config.base_size_mbit * kBitsPerMbit * (1.0 + config.svc_overhead);
  const double per_layer = svc_total_bits / static_cast<double>(config.layers_per_file);
  Grid<double> layers(config.file_count, config.layers_per_file, per_layer);
  return VideoLibrary(std::move(layers), config.base_size_mbit * kBitsPerMbit,
                      config.popularity,
                      QualityPreference::truncated_geometric(config.layers_per_file,
                                                             config.preference_rho));
}

}  // namespace svcache
