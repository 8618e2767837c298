#pragma once

#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "attrdesc/attributes.hpp"

namespace attrdesc {

/// Fixed pinhole intrinsics. `focal_length * resolution_scale` is the focal
/// length in pixels.
struct CameraIntrinsics {
  double focal_length = 1.0;
  double resolution_scale = 72.0;
  int width = 64;
  int height = 64;

  double focal_pixels() const { return focal_length * resolution_scale; }
  void validate() const;
};

/// World-to-camera transform: X_cam = R * X_world + T.
///
/// Camera axes: x' is image-right, y' is image-up and z' points from the
/// object toward the camera, so visible points have negative z' and the
/// depth of a point is -z'.
struct CameraExtrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d position() const { return -rotation.transpose() * translation; }
  Eigen::Vector3d optical_axis() const { return rotation.row(2).transpose(); }
};

/// Maps the normalized 0..100 height/distance attributes to world units.
/// Horizontal distance is `distance_offset + distance * distance_scale`; the
/// offset keeps the camera outside the unit-radius object at distance 0.
struct PlacementMapping {
  double height_scale = 0.04;
  double distance_scale = 0.04;
  double height_offset = 0.0;
  double distance_offset = 2.5;

  void validate() const;
};

using ProjectionMatrix = Eigen::Matrix<double, 3, 4>;

class BehindCameraError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Camera position for a pose: azimuth measured from +y toward +x around the
/// z (up) axis, elevation from the height/distance pair.
Eigen::Vector3d camera_position(double azimuth_deg, double height, double distance,
                                const PlacementMapping& map);

/// Look-at pose facing the world origin, then rolled by `in_plane_deg` about
/// the optical axis. When the camera sits on the up axis the up reference
/// falls back to world +y.
CameraExtrinsics extrinsics(double azimuth_deg, double height, double distance,
                            double in_plane_deg, const PlacementMapping& map);

CameraExtrinsics extrinsics(const AttributeVector& attrs, const PlacementMapping& map);

/// K * [R | T] with K = diag(gamma f, gamma f, 1).
ProjectionMatrix projection_matrix(const CameraIntrinsics& intr, const CameraExtrinsics& extr);

/// Pixel coordinates (origin top-left, +y down, principal point at the
/// image center). Throws BehindCameraError for points with depth <= 0.
Eigen::Vector2d project(const ProjectionMatrix& m, const Eigen::Vector3d& point,
                        const CameraIntrinsics& intr);

}  // namespace attrdesc
