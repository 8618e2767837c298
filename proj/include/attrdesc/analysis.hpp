#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "attrdesc/attributes.hpp"
#include "attrdesc/camera.hpp"
#include "attrdesc/pipeline.hpp"

namespace attrdesc {

inline constexpr double kDefaultRollThreshold = 30.0;

/// Roll magnitude of an in-plane angle: the circular distance to 0,
/// so 350 deg counts as a 10 deg roll.
double roll_magnitude(double in_plane_deg);

/// One camera viewpoint on the unit sphere around the object.
struct ViewpointSample {
  Eigen::Vector3d direction = Eigen::Vector3d::UnitY();
  double in_plane = 0.0;
  /// roll_magnitude(in_plane) > threshold.
  bool high_roll = false;
  std::string group;
};

/// Viewpoint of one attribute vector.
ViewpointSample viewpoint_of(const AttributeVector& attrs, const PlacementMapping& map,
                             double roll_threshold = kDefaultRollThreshold, std::string group = {});

/// Draws `n` attribute vectors from `dist` and converts each to a viewpoint.
std::vector<ViewpointSample> viewpoint_cloud(const AttributeDistribution& dist, std::size_t n,
                                             const PlacementMapping& map, std::uint64_t seed,
                                             double roll_threshold = kDefaultRollThreshold,
                                             const std::string& group = {});

/// Viewpoints of every manifest record, grouped by the record's group.
std::vector<ViewpointSample> viewpoint_cloud(const DatasetManifest& manifest,
                                             double roll_threshold = kDefaultRollThreshold);

/// `bins` equal-width bins over the kind's range. The top edge of a clamped
/// range falls into the last bin.
struct Histogram {
  AttributeKind kind = AttributeKind::InPlaneRotation;
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> counts;

  std::size_t total() const;
};

Histogram attribute_histogram(const std::vector<AttributeVector>& samples, AttributeKind kind,
                              std::size_t bins);
Histogram attribute_histogram(const DatasetManifest& manifest, AttributeKind kind, std::size_t bins);

/// CSV with columns group,x,y,z,in_plane,high_roll.
void write_viewpoints_csv(const std::filesystem::path& path, const std::vector<ViewpointSample>& samples);
/// CSV with columns bin,lo,hi,count.
void write_histogram_csv(const std::filesystem::path& path, const Histogram& histogram);

}  // namespace attrdesc
