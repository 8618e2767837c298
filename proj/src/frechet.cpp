#include "attrdesc/frechet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "attrdesc/seeding.hpp"

namespace attrdesc {

namespace {

std::string_view kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::GrayDownsample: return "gray_downsample";
    case FeatureKind::RandomProjection: return "random_projection";
    case FeatureKind::ColorGradHist: return "color_grad_hist";
  }
  return "unknown";
}

FeatureKind parse_kind(const std::string& s) {
  for (FeatureKind k : {FeatureKind::GrayDownsample, FeatureKind::RandomProjection,
                        FeatureKind::ColorGradHist}) {
    if (kind_name(k) == s) return k;
  }
  throw std::invalid_argument("unknown feature extractor: " + s);
}

const char* normalization_name(Normalization n) {
  switch (n) {
    case Normalization::None: return "none";
    case Normalization::Peak: return "peak";
    case Normalization::Mean: return "mean";
  }
  return "unknown";
}

Normalization parse_normalization(const std::string& s) {
  for (Normalization n : {Normalization::None, Normalization::Peak, Normalization::Mean}) {
    if (normalization_name(n) == s) return n;
  }
  throw std::invalid_argument("unknown normalization: " + s);
}

// Row i holds the fraction of output cell i covered by each input pixel.
Eigen::MatrixXd area_weights(int out, int in) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(out, in);
  const double cell = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    const double lo = i * cell;
    const double hi = (i + 1) * cell;
    for (int p = static_cast<int>(std::floor(lo)); p < std::min(in, static_cast<int>(std::ceil(hi))); ++p) {
      const double overlap = std::min(hi, p + 1.0) - std::max(lo, static_cast<double>(p));
      if (overlap > 0.0) w(i, p) = overlap / cell;
    }
  }
  return w;
}

Eigen::VectorXd color_grad_hist(const Image& img, int bins) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(4 * bins);
  const double n = static_cast<double>(img.width()) * img.height();
  auto bin_of = [bins](double v) { return std::clamp(static_cast<int>(v * bins), 0, bins - 1); };
  for (const Rgb& p : img.pixels()) {
    out[bin_of(p.r)] += 1.0 / n;
    out[bins + bin_of(p.g)] += 1.0 / n;
    out[2 * bins + bin_of(p.b)] += 1.0 / n;
  }
  auto lum = [&img](int x, int y) {
    return luminance(img.at(std::clamp(x, 0, img.width() - 1), std::clamp(y, 0, img.height() - 1)));
  };
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      // Sobel
      const double gx = lum(x + 1, y - 1) + 2.0 * lum(x + 1, y) + lum(x + 1, y + 1) - lum(x - 1, y - 1) -
                        2.0 * lum(x - 1, y) - lum(x - 1, y + 1);
      const double gy = lum(x - 1, y + 1) + 2.0 * lum(x, y + 1) + lum(x + 1, y + 1) - lum(x - 1, y - 1) -
                        2.0 * lum(x, y - 1) - lum(x + 1, y - 1);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx);
      if (angle < 0.0) angle += 2.0 * std::numbers::pi;
      out[3 * bins + bin_of(angle / (2.0 * std::numbers::pi))] += mag / n;
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Extractor configuration

int FeatureExtractor::output_dimension() const {
  switch (kind) {
    case FeatureKind::GrayDownsample: return (color ? 3 : 1) * grid * grid;
    case FeatureKind::RandomProjection: return dimension;
    case FeatureKind::ColorGradHist: return 4 * bins + (color ? 3 : 1) * layout * layout;
  }
  return 0;
}

void FeatureExtractor::validate() const {
  if (grid < 1) throw std::invalid_argument("feature grid must be >= 1");
  if (kind == FeatureKind::RandomProjection && dimension < 1) {
    throw std::invalid_argument("projection dimension must be >= 1");
  }
  if (kind == FeatureKind::ColorGradHist && bins < 1) throw std::invalid_argument("bins must be >= 1");
}

std::string FeatureExtractor::config_hash() const { return hex64(fnv1a(nlohmann::json(*this).dump())); }

void to_json(nlohmann::json& j, const FeatureExtractor& e) {
  j = nlohmann::json::object();
  j["kind"] = kind_name(e.kind);
  j["grid"] = e.grid;
  if (e.kind == FeatureKind::RandomProjection) {
    j["dimension"] = e.dimension;
    j["seed"] = e.seed;
  }
  if (e.kind == FeatureKind::ColorGradHist) {
    j["bins"] = e.bins;
    if (e.layout > 0) j["layout"] = e.layout;
  }
  if (e.normalize != Normalization::None) j["normalize"] = normalization_name(e.normalize);
  if (e.color) j["color"] = true;
}

void from_json(const nlohmann::json& j, FeatureExtractor& e) {
  e = FeatureExtractor{};
  e.kind = parse_kind(j.value("kind", std::string(kind_name(e.kind))));
  e.grid = j.value("grid", e.grid);
  e.dimension = j.value("dimension", e.dimension);
  e.bins = j.value("bins", e.bins);
  e.seed = j.value("seed", e.seed);
  e.normalize = parse_normalization(j.value("normalize", std::string("none")));
  e.layout = j.value("layout", e.layout);
  e.color = j.value("color", e.color);
  e.validate();
}

// ---------------------------------------------------------------------------
// Extraction

Eigen::VectorXd gray_downsample(const Image& image, int grid) {
  if (image.width() < grid || image.height() < grid) {
    throw std::invalid_argument("image smaller than the feature grid");
  }
  Eigen::MatrixXd lum(image.height(), image.width());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) lum(y, x) = luminance(image.at(x, y));
  }
  const Eigen::MatrixXd cells = area_weights(grid, image.height()) * lum *
                                area_weights(grid, image.width()).transpose();
  Eigen::VectorXd out(grid * grid);
  for (int r = 0; r < grid; ++r) {
    for (int c = 0; c < grid; ++c) out[r * grid + c] = cells(r, c);
  }
  return out;
}

Eigen::VectorXd color_downsample(const Image& image, int grid) {
  if (image.width() < grid || image.height() < grid) {
    throw std::invalid_argument("image smaller than the feature grid");
  }
  const Eigen::MatrixXd wy = area_weights(grid, image.height());
  const Eigen::MatrixXd wx = area_weights(grid, image.width()).transpose();
  Eigen::VectorXd out(3 * grid * grid);
  Eigen::MatrixXd plane(image.height(), image.width());
  for (int ch = 0; ch < 3; ++ch) {
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) {
        const Rgb& p = image.at(x, y);
        plane(y, x) = ch == 0 ? p.r : ch == 1 ? p.g : p.b;
      }
    }
    const Eigen::MatrixXd cells = wy * plane * wx;
    for (int r = 0; r < grid; ++r) {
      for (int c = 0; c < grid; ++c) out[ch * grid * grid + r * grid + c] = cells(r, c);
    }
  }
  return out;
}

Image peak_normalized(const Image& image) {
  double peak = 0.0;
  for (const Rgb& p : image.pixels()) peak = std::max(peak, luminance(p));
  Image out = image;
  if (peak <= 0.0) return out;
  const float k = static_cast<float>(1.0 / peak);
  for (Rgb& p : out.pixels()) p = {std::min(1.0f, p.r * k), std::min(1.0f, p.g * k), std::min(1.0f, p.b * k)};
  return out;
}

Image brightness_normalized(const Image& image) {
  double sum = 0.0;
  std::size_t lit = 0;
  for (const Rgb& p : image.pixels()) {
    const double l = luminance(p);
    if (l > 0.0) {
      sum += l;
      ++lit;
    }
  }
  Image out = image;
  if (lit == 0) return out;
  const float k = static_cast<float>(kNormalizedBrightness * lit / sum);
  for (Rgb& p : out.pixels()) p = {std::min(1.0f, p.r * k), std::min(1.0f, p.g * k), std::min(1.0f, p.b * k)};
  return out;
}

FeaturePipeline::FeaturePipeline(FeatureExtractor config) : config_(config) {
  config_.validate();
  if (config_.kind == FeatureKind::RandomProjection) {
    const int in = (config_.color ? 3 : 1) * config_.grid * config_.grid;
    std::mt19937_64 rng(config_.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    projection_.resize(config_.dimension, in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (int r = 0; r < config_.dimension; ++r) {
      for (int c = 0; c < in; ++c) projection_(r, c) = normal(rng) * scale;
    }
  }
}

Eigen::VectorXd FeaturePipeline::describe(const Image& image) const {
  switch (config_.normalize) {
    case Normalization::None: return describe_raw(image);
    case Normalization::Peak: return describe_raw(peak_normalized(image));
    case Normalization::Mean: return describe_raw(brightness_normalized(image));
  }
  throw std::logic_error("unhandled normalization");
}

Eigen::VectorXd FeaturePipeline::layout_of(const Image& image, int grid) const {
  return config_.color ? color_downsample(image, grid) : gray_downsample(image, grid);
}

Eigen::VectorXd FeaturePipeline::describe_raw(const Image& image) const {
  switch (config_.kind) {
    case FeatureKind::GrayDownsample: return layout_of(image, config_.grid);
    case FeatureKind::RandomProjection: return projection_ * layout_of(image, config_.grid);
    case FeatureKind::ColorGradHist: {
      if (config_.layout == 0) return color_grad_hist(image, config_.bins);
      Eigen::VectorXd out(config_.output_dimension());
      out << color_grad_hist(image, config_.bins), layout_of(image, config_.layout);
      return out;
    }
  }
  throw std::logic_error("unhandled feature kind");
}

Eigen::MatrixXd FeaturePipeline::extract(const std::vector<Image>& images) const {
  if (images.empty()) throw std::invalid_argument("no images to extract features from");
  const int w = images.front().width();
  const int h = images.front().height();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(images.size()), dimension());
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].width() != w || images[i].height() != h) {
      throw std::invalid_argument("image " + std::to_string(i) + " size differs from the first image");
    }
    out.row(static_cast<Eigen::Index>(i)) = describe(images[i]).transpose();
  }
  return out;
}

Eigen::MatrixXd extract(const std::vector<Image>& images, const FeatureExtractor& ex) {
  return FeaturePipeline(ex).extract(images);
}

// ---------------------------------------------------------------------------
// Statistics

GaussianStats fit_stats(const Eigen::MatrixXd& features, double epsilon, CovarianceNormalization norm) {
  if (features.rows() < 2) throw std::invalid_argument("need at least two feature rows");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("regularization must be >= 0");
  GaussianStats s;
  s.count = static_cast<std::size_t>(features.rows());
  s.mean = features.colwise().mean().transpose();
  const Eigen::MatrixXd centered = features.rowwise() - s.mean.transpose();
  const double denom = norm == CovarianceNormalization::Unbiased ? features.rows() - 1.0
                                                                 : static_cast<double>(features.rows());
  Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
  cov.diagonal().array() += epsilon;
  s.covariance = 0.5 * (cov + cov.transpose());
  return s;
}

double relative_regularization(const Eigen::MatrixXd& cov, double factor) {
  if (cov.rows() == 0) return 0.0;
  return factor * cov.diagonal().mean();
}

GaussianStats regularized(GaussianStats stats, double factor) {
  const double eps = relative_regularization(stats.covariance, factor);
  stats.covariance.diagonal().array() += eps;
  return stats;
}

namespace {

void require_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix is not square");
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("matrix is not symmetric");
  }
}

double trace_sqrt_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

}  // namespace

Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m) {
  require_symmetric(m);
  if (m.rows() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd& v = es.eigenvectors();
  Eigen::MatrixXd s = v * root.asDiagonal() * v.transpose();
  return 0.5 * (s + s.transpose());
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  return FrechetReference(b).distance(a);
}

FrechetReference::FrechetReference(GaussianStats stats) : stats_(std::move(stats)) {
  sqrt_cov_ = sqrtm_psd(stats_.covariance);
  trace_ = stats_.covariance.trace();
}

double FrechetReference::distance(const GaussianStats& other) const {
  if (other.dimension() != dimension() || other.covariance.rows() != dimension()) {
    throw std::invalid_argument("Frechet distance between stats of different dimension");
  }
  require_symmetric(other.covariance);
  const double mean_term = (other.mean - stats_.mean).squaredNorm();
  const Eigen::MatrixXd inner = sqrt_cov_ * other.covariance * sqrt_cov_;
  const double cross = trace_sqrt_psd(inner);
  return std::max(0.0, mean_term + other.covariance.trace() + trace_ - 2.0 * cross);
}

// ---------------------------------------------------------------------------
// Persistence

void to_json(nlohmann::json& j, const GaussianStats& s) {
  j = nlohmann::json::object();
  j["count"] = s.count;
  j["mean"] = std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size());
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < s.covariance.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(s.covariance.cols()));
    for (Eigen::Index c = 0; c < s.covariance.cols(); ++c) row[static_cast<std::size_t>(c)] = s.covariance(r, c);
    rows.push_back(std::move(row));
  }
  j["covariance"] = std::move(rows);
}

void from_json(const nlohmann::json& j, GaussianStats& s) {
  s.count = j.at("count").get<std::size_t>();
  const auto mean = j.at("mean").get<std::vector<double>>();
  s.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  const auto& rows = j.at("covariance");
  const auto d = static_cast<Eigen::Index>(mean.size());
  if (static_cast<Eigen::Index>(rows.size()) != d) throw std::invalid_argument("covariance/mean size mismatch");
  s.covariance.resize(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const auto row = rows[static_cast<std::size_t>(r)].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != d) throw std::invalid_argument("covariance row size mismatch");
    for (Eigen::Index c = 0; c < d; ++c) s.covariance(r, c) = row[static_cast<std::size_t>(c)];
  }
}

StatsCache::StatsCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  if (!in) throw std::runtime_error("cannot read stats cache " + path_.string());
  const auto doc = nlohmann::json::parse(in);
  if (doc.value("schema", std::string{}) != "attrdesc.stats-cache/1") {
    throw std::runtime_error("unsupported stats cache schema in " + path_.string());
  }
  entries_ = doc.at("entries");
}

std::string StatsCache::key(const std::string& dataset_id, const FeatureExtractor& ex) {
  return dataset_id + "|" + ex.config_hash();
}

std::optional<GaussianStats> StatsCache::find(const std::string& dataset_id,
                                              const FeatureExtractor& ex) const {
  const auto it = entries_.find(key(dataset_id, ex));
  if (it == entries_.end()) return std::nullopt;
  return it->get<GaussianStats>();
}

void StatsCache::store(const std::string& dataset_id, const FeatureExtractor& ex,
                       const GaussianStats& stats) {
  entries_[key(dataset_id, ex)] = stats;
}

void StatsCache::save() const {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_);
  if (!out) throw std::runtime_error("cannot write stats cache " + path_.string());
  nlohmann::json doc{{"schema", "attrdesc.stats-cache/1"}, {"entries", entries_}};
  out << doc.dump(1) << '\n';
}

}  // namespace attrdesc
