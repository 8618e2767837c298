#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "attrdesc/attributes.hpp"
#include "attrdesc/camera.hpp"
#include "attrdesc/image.hpp"

namespace attrdesc {

enum class PrimitiveShape { Box, Ellipsoid };

/// Axis-aligned solid in object space. `extents` are half-extents for boxes
/// and semi-axes for ellipsoids.
struct Primitive {
  PrimitiveShape shape = PrimitiveShape::Box;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d extents = Eigen::Vector3d::Ones();
  Rgb color{0.8f, 0.8f, 0.8f};
};

/// A rigid object made of primitives, front along +y, z up, centered at the
/// origin with bounding radius 1 (see normalize_model).
struct ObjectModel {
  std::string label;
  std::vector<Primitive> primitives;
};

/// Radius of the smallest origin-centered sphere containing every
/// primitive's own bounding sphere (exact corner distance for boxes,
/// |center| + largest semi-axis for ellipsoids).
double bounding_radius(const ObjectModel& model);

/// Recenters on the bounding-box center and rescales to bounding radius 1.
ObjectModel normalize_model(ObjectModel model);

/// Procedural vehicle-like model; shape proportions and colors vary with `identity`.
ObjectModel builtin_model(std::size_t identity, std::uint64_t seed = 0);
std::vector<ObjectModel> builtin_models(std::size_t count, std::uint64_t seed = 0);

void to_json(nlohmann::json& j, const ObjectModel& m);
void from_json(const nlohmann::json& j, ObjectModel& m);
ObjectModel load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const ObjectModel& model);

enum class RenderMode { Optimization, Generation };

/// 2D stamp drawn over a rendered image to simulate an occluder.
struct OccluderStamp {
  enum class Shape { Rect, Ellipse };
  Shape shape = Shape::Rect;
  Rgb color{0.3f, 0.3f, 0.3f};
  double aspect = 0.25;  // width / height
};

std::vector<OccluderStamp> default_occluders();

/// Smooth gradients and stripes standing in for cropped scene backgrounds.
std::vector<Image> procedural_backgrounds(std::size_t count, int width, int height,
                                          std::uint64_t seed);

struct OccluderPlacement {
  double min_height_fraction = 0.1;
  double max_height_fraction = 0.3;
};

struct Shading {
  double ambient = 0.15;
  double light_elevation_deg = 45.0;
};

/// Square window around the projected bounding box, resampled to
/// `size` x `size`. The window side is the longer box side times
/// (1 + margin).
struct CropOptions {
  bool enabled = false;
  int size = 64;
  double margin = 0.1;
};

struct RenderOptions {
  RenderMode mode = RenderMode::Optimization;
  std::shared_ptr<const std::vector<Image>> backgrounds;
  std::vector<OccluderStamp> occluders;
  double occlusion_probability = 0.0;
  OccluderPlacement placement;
  Shading shading;
  CropOptions crop;
  /// Supersampling: samples x samples rays per pixel, box filtered.
  int samples = 1;
  std::uint64_t seed = 0;
};

/// Projected extent of an object in pixel coordinates, clipped to the image.
struct PixelBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
  bool empty() const { return !(x1 > x0 && y1 > y0); }
};

struct RenderResult {
  /// Final image; cropped when RenderOptions::crop is enabled.
  Image image;
  /// Pre-composite render (black background, no occluders).
  Image foreground;
  /// Pixels hit by at least one sample.
  Mask silhouette;
  /// Per-pixel fraction of samples that hit the object, row-major.
  std::vector<float> coverage;
  PixelBox bounding_box;
  /// The object covers no pixel; the render itself still succeeds.
  bool empty_silhouette = false;
  int background_id = -1;
  bool occluded = false;
  int occluder_id = -1;
};

/// Unit vector toward the light: LightDirection sweeps from east (+x, 0 deg)
/// through +y to west (-x, 180 deg) at a fixed elevation.
Eigen::Vector3d light_vector(double light_direction_deg, const Shading& shading);

/// Analytic projected bounding box from primitive extents.
PixelBox projected_bounds(const ObjectModel& model, const CameraExtrinsics& pose,
                          const CameraIntrinsics& intr);

/// Area-weighted resampling of the crop window onto a `crop.size` square.
/// Window parts outside the source read as black.
Image crop_to_box(const Image& source, const PixelBox& box, const CropOptions& crop);

/// Ray-cast render with a depth buffer and Lambertian shading
/// `color * (ambient + intensity/100 * max(0, n.l))`. Optimization mode is
/// black background without occluders; Generation mode composites a
/// background and, with the configured probability, one occluder.
RenderResult render(const ObjectModel& model, const AttributeVector& attrs,
                    const CameraIntrinsics& intr, const PlacementMapping& map,
                    const RenderOptions& opts);

/// Element i uses model i mod models.size() and seed derive_seed(opts.seed, {i}).
std::vector<RenderResult> render_batch(const std::vector<ObjectModel>& models,
                                       const std::vector<AttributeVector>& attrs,
                                       const CameraIntrinsics& intr, const PlacementMapping& map,
                                       const RenderOptions& opts, std::size_t workers = 1);

struct CompositeResult {
  Image image;
  bool occluded = false;
  int occluder_id = -1;
};

/// Replaces pixels outside `silhouette` with `background`, then with
/// probability `occlusion_probability` stamps one occluder from the pool at
/// a uniform position in the lower image half. With `coverage`, edge pixels
/// of the (premultiplied) foreground are blended with the background.
CompositeResult composite(const Image& foreground, const Mask& silhouette, const Image& background,
                          const std::vector<OccluderStamp>& occluders, double occlusion_probability,
                          std::uint64_t seed, const OccluderPlacement& placement = {},
                          const std::vector<float>* coverage = nullptr);

}  // namespace attrdesc
