#include "attrdesc/camera.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

namespace attrdesc {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(focal_length > 0.0) || !(resolution_scale > 0.0)) {
    throw std::invalid_argument("focal length and resolution scale must be positive");
  }
  if (width < 1 || height < 1) throw std::invalid_argument("image size must be at least 1x1");
}

void PlacementMapping::validate() const {
  if (!(height_scale > 0.0) || !(distance_scale > 0.0)) {
    throw std::invalid_argument("placement scales must be positive");
  }
  if (!(distance_offset >= 0.0)) throw std::invalid_argument("distance offset must be >= 0");
}

Eigen::Vector3d camera_position(double azimuth_deg, double height, double distance,
                                const PlacementMapping& map) {
  const double alpha = normalize(AttributeKind::Azimuth, azimuth_deg) * kDegToRad;
  const double d_w = map.distance_offset + distance * map.distance_scale;
  const double h_w = height * map.height_scale + map.height_offset;
  const double r = std::hypot(d_w, h_w);
  if (!(r > 0.0)) throw std::invalid_argument("camera collapses onto the object center");
  const double phi = std::atan2(h_w, d_w);
  return {r * std::sin(alpha) * std::cos(phi), r * std::cos(alpha) * std::cos(phi),
          r * std::sin(phi)};
}

CameraExtrinsics extrinsics(double azimuth_deg, double height, double distance,
                            double in_plane_deg, const PlacementMapping& map) {
  const Eigen::Vector3d p = camera_position(azimuth_deg, height, distance, map);
  const Eigen::Vector3d z_axis = p.normalized();

  Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d x_axis = up.cross(z_axis);
  if (x_axis.norm() < 1e-12) {
    up = Eigen::Vector3d::UnitY();
    x_axis = up.cross(z_axis);
  }
  x_axis.normalize();
  const Eigen::Vector3d y_axis = z_axis.cross(x_axis);

  const double roll = normalize(AttributeKind::InPlaneRotation, in_plane_deg) * kDegToRad;
  const double c = std::cos(roll);
  const double s = std::sin(roll);
  const Eigen::Vector3d x_rolled = c * x_axis + s * y_axis;
  const Eigen::Vector3d y_rolled = -s * x_axis + c * y_axis;

  CameraExtrinsics out;
  out.rotation.row(0) = x_rolled.transpose();
  out.rotation.row(1) = y_rolled.transpose();
  out.rotation.row(2) = z_axis.transpose();
  out.translation = -out.rotation * p;
  return out;
}

CameraExtrinsics extrinsics(const AttributeVector& attrs, const PlacementMapping& map) {
  return extrinsics(attrs[AttributeKind::Azimuth], attrs[AttributeKind::CameraHeight],
                    attrs[AttributeKind::CameraDistance], attrs[AttributeKind::InPlaneRotation], map);
}

ProjectionMatrix projection_matrix(const CameraIntrinsics& intr, const CameraExtrinsics& extr) {
  Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
  k(0, 0) = intr.focal_pixels();
  k(1, 1) = intr.focal_pixels();
  Eigen::Matrix<double, 3, 4> rt;
  rt.leftCols<3>() = extr.rotation;
  rt.col(3) = extr.translation;
  return k * rt;
}

Eigen::Vector2d project(const ProjectionMatrix& m, const Eigen::Vector3d& point,
                        const CameraIntrinsics& intr) {
  const Eigen::Vector3d h = m * point.homogeneous();
  const double depth = -h.z();
  if (!(depth > 0.0)) throw BehindCameraError("point is not in front of the camera");
  // x' maps to +u, y' (up) maps to -v
  return {0.5 * intr.width + h.x() / depth, 0.5 * intr.height - h.y() / depth};
}

}  // namespace attrdesc
