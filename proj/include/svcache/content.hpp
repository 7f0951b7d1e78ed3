#pragma once

#include <cstddef>
#include <vector>

#include "svcache/common.hpp"

namespace svcache {

/// Mandelbrot-Zipf parameters: skewness alpha, plateau q. q = 0 recovers Zipf.
struct PopularityModel {
  double alpha = 0.8;
  double plateau = 5.0;
};

/// Request probability of each file, most popular first:
///   P_f = (f + q)^-alpha / sum_n (n + q)^-alpha,  f = 1..F
std::vector<double> mz_pmf(std::size_t file_count, double alpha, double plateau);

/// Distribution of the requested quality level: a user asking for quality q
/// downloads layers 1..q.
class QualityPreference {
 public:
  explicit QualityPreference(std::vector<double> pmf);

  /// One-parameter family over 1..L with weight rho^(q-1); rho = 1 is uniform,
  /// rho > 1 leans toward full-quality requests.
  static QualityPreference truncated_geometric(std::size_t levels, double rho);

  std::size_t levels() const { return pmf_.size(); }
  double pmf(std::size_t quality) const { return pmf_[quality - 1]; }
  /// Pr(requested quality >= level).
  double tail(std::size_t level) const { return tail_[level - 1]; }
  double mean_quality() const { return mean_; }

 private:
  std::vector<double> pmf_;
  std::vector<double> tail_;
  double mean_ = 0.0;
};

struct LibraryConfig {
  std::size_t file_count = 30;
  std::size_t layers_per_file = 8;
  double base_size_mbit = 50.0;  // size of the file without SVC processing
  double svc_overhead = 0.10;    // SVC-encoded total is base * (1 + overhead)
  PopularityModel popularity;
  double preference_rho = 1.5;
};

struct SuperLayer {
  std::size_t file;     // 1-based
  std::size_t quality;  // layers 1..quality bundled
  double bits;
};

/// Immutable catalog: per-layer sizes, materialized popularity pmf and
/// quality-preference tail. Files are ordered most popular first; layer 1 is
/// the base layer.
class VideoLibrary {
 public:
  VideoLibrary(Grid<double> layer_bits, double no_svc_file_bits, PopularityModel popularity,
               QualityPreference preference);

  std::size_t file_count() const { return layer_bits_.rows(); }
  std::size_t layers_per_file() const { return layer_bits_.cols(); }

  double layer_bits(std::size_t f, std::size_t l) const { return layer_bits_(f - 1, l - 1); }
  const Grid<double>& layer_bits_grid() const { return layer_bits_; }
  double no_svc_file_bits() const { return no_svc_file_bits_; }

  double popularity(std::size_t f) const { return popularity_[f - 1]; }
  const std::vector<double>& popularity_pmf() const { return popularity_; }
  const PopularityModel& popularity_params() const { return popularity_params_; }
  const QualityPreference& preference() const { return preference_; }

  /// P_f * Pr(requested quality >= l): probability a random request needs
  /// layer l of file f.
  double layer_request_prob(std::size_t f, std::size_t l) const;

  SuperLayer super_layer(std::size_t f, std::size_t q) const;

  /// Expected bits downloaded per request when only requested layers are sent.
  double mean_request_bits() const;

 private:
  void check_indices(std::size_t f, std::size_t l) const;

  Grid<double> layer_bits_;
  double no_svc_file_bits_;
  PopularityModel popularity_params_;
  std::vector<double> popularity_;
  QualityPreference preference_;
};

/// Case-study catalog: the SVC-encoded file is base*(1+overhead) bits split
/// evenly across the layers.
VideoLibrary build_library(const LibraryConfig& config);

}  // namespace svcache
