#include "attrdesc/attributes.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace attrdesc {

namespace {

constexpr std::array<std::string_view, kAttributeCount> kNames = {
    "in_plane_rotation", "azimuth",         "light_intensity",
    "light_direction",   "camera_height",   "camera_distance",
};

}  // namespace

AttributeRange range_of(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::InPlaneRotation:
    case AttributeKind::Azimuth:
      return {0.0, 360.0, true};
    case AttributeKind::LightDirection:
      return {0.0, 180.0, false};
    case AttributeKind::LightIntensity:
    case AttributeKind::CameraHeight:
    case AttributeKind::CameraDistance:
      return {0.0, 100.0, false};
  }
  throw std::invalid_argument("unknown attribute kind");
}

std::string_view name_of(AttributeKind kind) { return kNames.at(index_of(kind)); }

AttributeKind parse_attribute_kind(std::string_view name) {
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    if (kNames[i] == name) return kAllAttributes[i];
  }
  throw std::invalid_argument("unknown attribute: " + std::string(name));
}

double normalize(AttributeKind kind, double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("non-finite value for attribute " + std::string(name_of(kind)));
  }
  const AttributeRange r = range_of(kind);
  if (!r.circular) return std::clamp(value, r.lo, r.hi);
  const double period = r.hi - r.lo;
  double w = std::fmod(value - r.lo, period);
  if (w < 0.0) w += period;
  // -tiny + period can round up to exactly period
  if (w >= period) w = 0.0;
  return w + r.lo;
}

// ---------------------------------------------------------------------------
// AttributeDistribution

AttributeDistribution::AttributeDistribution(std::array<KindDistribution, kAttributeCount> kinds)
    : kinds_(std::move(kinds)) {
  for (AttributeKind k : kAllAttributes) {
    const auto& kd = kinds_[index_of(k)];
    if (kd.components.empty()) {
      throw std::invalid_argument("attribute " + std::string(name_of(k)) +
                                  " needs at least one component");
    }
    for (const auto& c : kd.components) {
      if (!(c.variance >= 0.0) || !std::isfinite(c.variance)) {
        throw std::invalid_argument("component variance must be finite and >= 0");
      }
      if (!std::isfinite(c.mean)) throw std::invalid_argument("component mean must be finite");
    }
  }
  rebuild_index();
}

void AttributeDistribution::rebuild_index() {
  locations_.clear();
  for (AttributeKind k : kAllAttributes) {
    for (std::size_t c = 0; c < kinds_[index_of(k)].components.size(); ++c) {
      locations_.emplace_back(k, c);
    }
  }
}

std::pair<AttributeKind, std::size_t> AttributeDistribution::locate(std::size_t index) const {
  if (index >= locations_.size()) {
    throw std::out_of_range("parameter index " + std::to_string(index) + " out of range [0, " +
                            std::to_string(locations_.size()) + ")");
  }
  return locations_[index];
}

std::size_t AttributeDistribution::first_parameter(AttributeKind k) const {
  std::size_t offset = 0;
  for (AttributeKind other : kAllAttributes) {
    if (other == k) return offset;
    offset += kinds_[index_of(other)].components.size();
  }
  return offset;
}

double AttributeDistribution::parameter(std::size_t index) const {
  const auto [k, c] = locate(index);
  return kinds_[index_of(k)].components[c].mean;
}

std::vector<double> AttributeDistribution::parameters() const {
  std::vector<double> theta;
  theta.reserve(locations_.size());
  for (const auto& [k, c] : locations_) theta.push_back(kinds_[index_of(k)].components[c].mean);
  return theta;
}

AttributeDistribution AttributeDistribution::with_parameters(const std::vector<double>& theta) const {
  if (theta.size() != locations_.size()) {
    throw std::invalid_argument("parameter vector has " + std::to_string(theta.size()) +
                                " entries, expected " + std::to_string(locations_.size()));
  }
  AttributeDistribution out = *this;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const auto [k, c] = locations_[i];
    out.kinds_[index_of(k)].components[c].mean = theta[i];
  }
  return out;
}

AttributeDistribution AttributeDistribution::set_parameter(std::size_t index, double value) const {
  const auto [k, c] = locate(index);
  if (!std::isfinite(value) || !range_of(k).contains(value)) {
    throw std::invalid_argument("value " + std::to_string(value) + " outside range of " +
                                std::string(name_of(k)));
  }
  AttributeDistribution out = *this;
  out.kinds_[index_of(k)].components[c].mean = value;
  return out;
}

bool AttributeDistribution::is_uniform() const {
  return std::all_of(kinds_.begin(), kinds_.end(), [](const auto& kd) { return kd.uniform; });
}

// ---------------------------------------------------------------------------
// SearchSpace

SearchSpace::SearchSpace(std::vector<AttributeKind> kinds, std::vector<std::vector<double>> grids)
    : kinds_(std::move(kinds)), grids_(std::move(grids)) {
  if (kinds_.size() != grids_.size()) {
    throw std::invalid_argument("search space needs one kind per grid");
  }
  for (std::size_t i = 0; i < grids_.size(); ++i) {
    const auto& g = grids_[i];
    if (g.empty()) throw std::invalid_argument("empty grid for parameter " + std::to_string(i));
    const AttributeRange r = range_of(kinds_[i]);
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!r.contains(g[j])) throw std::invalid_argument("grid value outside attribute range");
      if (j > 0 && !(g[j] > g[j - 1])) {
        throw std::invalid_argument("grid must be strictly ascending");
      }
    }
  }
}

std::size_t SearchSpace::total_candidates() const {
  std::size_t total = 0;
  for (const auto& g : grids_) total += g.size();
  return total;
}

std::vector<double> uniform_grid(AttributeKind kind, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("grid needs at least one step");
  const AttributeRange r = range_of(kind);
  std::vector<double> grid(steps);
  if (r.circular) {
    const double step = (r.hi - r.lo) / static_cast<double>(steps);
    for (std::size_t i = 0; i < steps; ++i) grid[i] = r.lo + step * static_cast<double>(i);
  } else if (steps == 1) {
    grid[0] = r.lo;
  } else {
    const double step = (r.hi - r.lo) / static_cast<double>(steps - 1);
    for (std::size_t i = 0; i < steps; ++i) grid[i] = r.lo + step * static_cast<double>(i);
    grid.back() = r.hi;
  }
  return grid;
}

SearchSpace make_search_space(const AttributeDistribution& dist, const AttributeModelConfig& config) {
  std::vector<AttributeKind> kinds;
  std::vector<std::vector<double>> grids;
  for (std::size_t i = 0; i < dist.parameter_count(); ++i) {
    const AttributeKind k = dist.locate(i).first;
    kinds.push_back(k);
    grids.push_back(uniform_grid(k, config.grid_steps[index_of(k)]));
  }
  return SearchSpace(std::move(kinds), std::move(grids));
}

AttributeDistribution default_distribution(const AttributeModelConfig& config) {
  if (!config.initial_means.empty() && config.initial_means.size() != kAttributeCount) {
    throw std::invalid_argument("initial_means needs one value per attribute");
  }
  std::array<KindDistribution, kAttributeCount> kinds;
  for (AttributeKind k : kAllAttributes) {
    const std::size_t i = index_of(k);
    const double mean = config.initial_means.empty()
                            ? uniform_grid(k, config.grid_steps[i]).front()
                            : normalize(k, config.initial_means[i]);
    kinds[i].components.assign(config.component_counts[i], GaussianComponent{mean, config.variances[i]});
  }
  return AttributeDistribution(std::move(kinds));
}

AttributeDistribution random_attributes(const SearchSpace& space) {
  std::array<KindDistribution, kAttributeCount> kinds;
  for (std::size_t i = 0; i < space.size(); ++i) {
    kinds[index_of(space.kind(i))].components.push_back({space.grid(i).front(), 0.0});
  }
  for (AttributeKind k : kAllAttributes) {
    auto& kd = kinds[index_of(k)];
    if (kd.components.empty()) kd.components.push_back({range_of(k).lo, 0.0});
    kd.uniform = true;
  }
  return AttributeDistribution(std::move(kinds));
}

std::vector<AttributeVector> sample(const AttributeDistribution& dist, std::size_t n,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<AttributeVector> out(n);
  for (auto& v : out) {
    for (AttributeKind k : kAllAttributes) {
      const auto& kd = dist.kind(k);
      const std::size_t count = kd.components.size();
      // Always consume one uniform and one normal per attribute.
      const double u = unit(rng);
      const double z = normal(rng);
      if (kd.uniform) {
        const AttributeRange r = range_of(k);
        v[k] = normalize(k, r.lo + u * (r.hi - r.lo));
        continue;
      }
      const std::size_t pick = std::min(count - 1, static_cast<std::size_t>(u * static_cast<double>(count)));
      const GaussianComponent& c = kd.components[pick];
      v[k] = normalize(k, c.mean + std::sqrt(c.variance) * z);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

void to_json(nlohmann::json& j, const AttributeVector& v) {
  j = nlohmann::json::object();
  for (AttributeKind k : kAllAttributes) j[std::string(name_of(k))] = v[k];
}

void from_json(const nlohmann::json& j, AttributeVector& v) {
  for (AttributeKind k : kAllAttributes) v[k] = j.at(std::string(name_of(k))).get<double>();
}

void to_json(nlohmann::json& j, const AttributeDistribution& d) {
  j = nlohmann::json::object();
  j["schema"] = kDistributionSchema;
  auto& attrs = j["attributes"] = nlohmann::json::object();
  for (AttributeKind k : kAllAttributes) {
    const auto& kd = d.kind(k);
    nlohmann::json entry;
    entry["uniform"] = kd.uniform;
    const double weight = 1.0 / static_cast<double>(kd.components.size());
    entry["components"] = nlohmann::json::array();
    for (const auto& c : kd.components) {
      entry["components"].push_back({{"mean", c.mean}, {"variance", c.variance}, {"weight", weight}});
    }
    attrs[std::string(name_of(k))] = std::move(entry);
  }
}

void from_json(const nlohmann::json& j, AttributeDistribution& d) {
  if (j.value("schema", std::string{}) != kDistributionSchema) {
    throw std::invalid_argument("unsupported distribution schema");
  }
  std::array<KindDistribution, kAttributeCount> kinds;
  const auto& attrs = j.at("attributes");
  for (AttributeKind k : kAllAttributes) {
    const auto& entry = attrs.at(std::string(name_of(k)));
    auto& kd = kinds[index_of(k)];
    kd.uniform = entry.value("uniform", false);
    const auto& comps = entry.at("components");
    for (const auto& c : comps) {
      const double weight = c.value("weight", 1.0 / static_cast<double>(comps.size()));
      if (std::abs(weight - 1.0 / static_cast<double>(comps.size())) > 1e-9) {
        throw std::invalid_argument("only equal mixture weights are supported");
      }
      kd.components.push_back({c.at("mean").get<double>(), c.at("variance").get<double>()});
    }
  }
  d = AttributeDistribution(std::move(kinds));
}

}  // namespace attrdesc
