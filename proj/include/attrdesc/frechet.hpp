#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "attrdesc/image.hpp"

namespace attrdesc {

enum class FeatureKind { GrayDownsample, RandomProjection, ColorGradHist };

/// Per-image brightness normalization applied before description.
enum class Normalization { None, Peak, Mean };

/// Image descriptor configuration.
///  - GrayDownsample: area-averaged luminance on a `grid` x `grid` lattice.
///  - RandomProjection: GrayDownsample followed by a fixed Gaussian
///    projection (seeded by `seed`) to `dimension` outputs.
///  - ColorGradHist: `bins`-bin histograms of R, G, B and of gradient
///    orientation (magnitude weighted), concatenated.
/// `normalize` rescales each image first: Peak via peak_normalized(), Mean
/// via brightness_normalized().
struct FeatureExtractor {
  FeatureKind kind = FeatureKind::RandomProjection;
  int grid = 16;
  int dimension = 64;
  int bins = 8;
  std::uint64_t seed = 0;
  Normalization normalize = Normalization::None;
  /// ColorGradHist only: appends a `layout` x `layout` luminance grid (0 = none).
  int layout = 0;
  /// Downsample R, G and B separately instead of luminance.
  bool color = false;

  int output_dimension() const;
  void validate() const;
  /// Stable digest of the configuration, used as a cache key.
  std::string config_hash() const;
};

void to_json(nlohmann::json& j, const FeatureExtractor& e);
void from_json(const nlohmann::json& j, FeatureExtractor& e);

/// Precomputed extraction state (the projection matrix); reuse it across
/// calls to avoid regenerating the projection per image set.
class FeaturePipeline {
 public:
  explicit FeaturePipeline(FeatureExtractor config);

  const FeatureExtractor& config() const { return config_; }
  int dimension() const { return config_.output_dimension(); }

  Eigen::VectorXd describe(const Image& image) const;
  /// Row i is the descriptor of images[i]. All images must share one size
  /// of at least grid x grid pixels.
  Eigen::MatrixXd extract(const std::vector<Image>& images) const;

 private:
  Eigen::VectorXd describe_raw(const Image& image) const;
  Eigen::VectorXd layout_of(const Image& image, int grid) const;

  FeatureExtractor config_;
  Eigen::MatrixXd projection_;
};

Eigen::MatrixXd extract(const std::vector<Image>& images, const FeatureExtractor& ex);

/// Area-averaged luminance on a grid x grid lattice, row-major.
Eigen::VectorXd gray_downsample(const Image& image, int grid);
/// Per-channel area averages, R plane then G then B.
Eigen::VectorXd color_downsample(const Image& image, int grid);

/// Copy of `image` scaled so its brightest pixel has luminance 1.
Image peak_normalized(const Image& image);

inline constexpr double kNormalizedBrightness = 0.5;

/// Copy of `image` scaled so the mean luminance of its non-black pixels is
/// kNormalizedBrightness (channels clamped to 1).
Image brightness_normalized(const Image& image);

enum class CovarianceNormalization { Unbiased, Biased };

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::size_t count = 0;

  Eigen::Index dimension() const { return mean.size(); }
};

/// Column mean and sample covariance (+ epsilon * I), symmetrized.
/// Requires at least two rows.
GaussianStats fit_stats(const Eigen::MatrixXd& features, double epsilon = 0.0,
                        CovarianceNormalization norm = CovarianceNormalization::Unbiased);

/// epsilon = factor * mean(diag(cov)).
double relative_regularization(const Eigen::MatrixXd& cov, double factor = 1e-6);

/// Copy of `stats` with relative_regularization(cov, factor) * I added.
GaussianStats regularized(GaussianStats stats, double factor = 1e-6);

/// Symmetric PSD square root via eigendecomposition, negative eigenvalues
/// clamped to zero. Throws std::invalid_argument when `m` is not symmetric
/// within a relative tolerance of 1e-10.
Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m);

/// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}), with the cross term
/// computed as Tr((S_b^{1/2} S_a S_b^{1/2})^{1/2}). Round-off negatives clamp to 0.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

/// Reference side of repeated distance computations; caches S^{1/2} and the trace.
class FrechetReference {
 public:
  FrechetReference() = default;
  explicit FrechetReference(GaussianStats stats);

  const GaussianStats& stats() const { return stats_; }
  Eigen::Index dimension() const { return stats_.dimension(); }
  double distance(const GaussianStats& other) const;

 private:
  GaussianStats stats_;
  Eigen::MatrixXd sqrt_cov_;
  double trace_ = 0.0;
};

void to_json(nlohmann::json& j, const GaussianStats& s);
void from_json(const nlohmann::json& j, GaussianStats& s);

/// Text cache of image-set statistics keyed by (dataset id, extractor hash).
class StatsCache {
 public:
  explicit StatsCache(std::filesystem::path path);

  std::optional<GaussianStats> find(const std::string& dataset_id, const FeatureExtractor& ex) const;
  void store(const std::string& dataset_id, const FeatureExtractor& ex, const GaussianStats& stats);
  /// Rewrites the cache file.
  void save() const;

  const std::filesystem::path& path() const { return path_; }

 private:
  static std::string key(const std::string& dataset_id, const FeatureExtractor& ex);

  std::filesystem::path path_;
  nlohmann::json entries_ = nlohmann::json::object();
};

}  // namespace attrdesc
