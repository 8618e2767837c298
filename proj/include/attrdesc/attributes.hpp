#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace attrdesc {

/// The six rendering attributes, listed in the default optimization order
/// (orientation, then lighting, then camera pose).
enum class AttributeKind : std::size_t {
  InPlaneRotation = 0,
  Azimuth,
  LightIntensity,
  LightDirection,
  CameraHeight,
  CameraDistance,
};

inline constexpr std::size_t kAttributeCount = 6;

inline constexpr std::array<AttributeKind, kAttributeCount> kAllAttributes = {
    AttributeKind::InPlaneRotation, AttributeKind::Azimuth,
    AttributeKind::LightIntensity,  AttributeKind::LightDirection,
    AttributeKind::CameraHeight,    AttributeKind::CameraDistance,
};

constexpr std::size_t index_of(AttributeKind kind) {
  return static_cast<std::size_t>(kind);
}

struct AttributeRange {
  double lo;
  double hi;
  bool circular;  // circular kinds live in [lo, hi), clamped kinds in [lo, hi]

  bool contains(double value) const {
    return circular ? (value >= lo && value < hi) : (value >= lo && value <= hi);
  }
};

AttributeRange range_of(AttributeKind kind);
std::string_view name_of(AttributeKind kind);
/// Accepts the snake_case names produced by name_of.
AttributeKind parse_attribute_kind(std::string_view name);

/// Wraps circular kinds into [0,360) and clamps the rest. Throws
/// std::invalid_argument on non-finite input.
double normalize(AttributeKind kind, double value);

/// One concrete attribute setting, i.e. the input of a single render.
struct AttributeVector {
  std::array<double, kAttributeCount> values{};

  double& operator[](AttributeKind kind) { return values[index_of(kind)]; }
  double operator[](AttributeKind kind) const { return values[index_of(kind)]; }

  bool operator==(const AttributeVector&) const = default;
};

struct GaussianComponent {
  double mean = 0.0;
  double variance = 0.0;

  bool operator==(const GaussianComponent&) const = default;
};

/// Per-kind parameterization. Mixture weights are always uniform. A kind
/// flagged `uniform` ignores its components and samples its full range.
struct KindDistribution {
  std::vector<GaussianComponent> components;
  bool uniform = false;

  bool operator==(const KindDistribution&) const = default;
};

/// Hyperparameters of the attribute model; defaults reproduce the reference
/// configuration (13 optimized means).
struct AttributeModelConfig {
  std::array<std::size_t, kAttributeCount> component_counts = {3, 6, 1, 1, 1, 1};
  std::array<std::size_t, kAttributeCount> grid_steps = {12, 12, 10, 6, 10, 5};
  std::array<double, kAttributeCount> variances = {10.0, 20.0, 0.63, 7.07, 0.4, 0.6};
  /// Initial mean per kind. Empty means "lowest grid value".
  std::vector<double> initial_means;
};

class SearchSpace;

/// Distribution over attribute vectors. The optimized parameter vector is
/// the flattened list of component means, kind by kind in enum order.
class AttributeDistribution {
 public:
  AttributeDistribution() = default;
  explicit AttributeDistribution(std::array<KindDistribution, kAttributeCount> kinds);

  const KindDistribution& kind(AttributeKind k) const { return kinds_[index_of(k)]; }
  const std::array<KindDistribution, kAttributeCount>& kinds() const { return kinds_; }

  std::size_t parameter_count() const { return locations_.size(); }
  /// Which (kind, component) a flattened parameter index addresses.
  std::pair<AttributeKind, std::size_t> locate(std::size_t index) const;
  /// First flattened index belonging to `k`.
  std::size_t first_parameter(AttributeKind k) const;

  double parameter(std::size_t index) const;
  std::vector<double> parameters() const;
  /// Copy with every mean replaced; `theta` must have parameter_count() entries.
  AttributeDistribution with_parameters(const std::vector<double>& theta) const;

  /// Copy with exactly one component mean replaced. Throws std::out_of_range
  /// for a bad index, std::invalid_argument when the value is outside the
  /// kind's range.
  AttributeDistribution set_parameter(std::size_t index, double value) const;

  bool is_uniform() const;

  bool operator==(const AttributeDistribution& other) const { return kinds_ == other.kinds_; }

 private:
  void rebuild_index();

  std::array<KindDistribution, kAttributeCount> kinds_{};
  std::vector<std::pair<AttributeKind, std::size_t>> locations_;
};

/// Per-parameter candidate grids. Every component of a kind shares its kind's grid.
class SearchSpace {
 public:
  SearchSpace() = default;
  SearchSpace(std::vector<AttributeKind> kinds, std::vector<std::vector<double>> grids);

  std::size_t size() const { return grids_.size(); }
  const std::vector<double>& grid(std::size_t index) const { return grids_.at(index); }
  AttributeKind kind(std::size_t index) const { return kinds_.at(index); }
  std::size_t total_candidates() const;

 private:
  std::vector<AttributeKind> kinds_;
  std::vector<std::vector<double>> grids_;
};

/// Uniform grid over a kind's range: circular kinds get `steps` points over
/// [0,360) (e.g. 0..330 by 30 for 12 steps), clamped kinds get `steps`
/// evenly spaced points including both ends.
std::vector<double> uniform_grid(AttributeKind kind, std::size_t steps);

SearchSpace make_search_space(const AttributeDistribution& dist,
                              const AttributeModelConfig& config = {});

/// Every component mean at the lowest grid value of its kind (or at
/// `config.initial_means` when given), with the configured fixed variances.
AttributeDistribution default_distribution(const AttributeModelConfig& config = {});

/// Distribution sampling every attribute uniformly over its full range. The
/// parameter layout follows `space`; means sit at the lowest grid value and
/// are ignored while sampling.
AttributeDistribution random_attributes(const SearchSpace& space);

/// Draws `n` independent attribute vectors. For each attribute: a uniformly
/// chosen component, then mean + sqrt(variance) * z, then normalize. The
/// random stream consumed per draw does not depend on the means, so two
/// distributions differing only in means see the same noise for the same seed.
std::vector<AttributeVector> sample(const AttributeDistribution& dist, std::size_t n,
                                    std::uint64_t seed);

void to_json(nlohmann::json& j, const AttributeVector& v);
void from_json(const nlohmann::json& j, AttributeVector& v);
void to_json(nlohmann::json& j, const AttributeDistribution& d);
void from_json(const nlohmann::json& j, AttributeDistribution& d);

inline constexpr std::string_view kDistributionSchema = "attrdesc.distribution/1";

}  // namespace attrdesc
