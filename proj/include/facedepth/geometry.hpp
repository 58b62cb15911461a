#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace facedepth {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Proper rigid motion x -> rotation * x + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  /// Intrinsic yaw (about +y), then pitch (about +x), then roll (about +z),
  /// all in degrees: R = Ry(yaw) * Rx(pitch) * Rz(roll).
  static RigidTransform from_euler_deg(double yaw, double pitch, double roll,
                                       const Vec3& translation = Vec3::Zero());

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_vector(const Vec3& v) const { return rotation * v; }
  RigidTransform inverse() const;
  RigidTransform operator*(const RigidTransform& rhs) const;

  /// Throws ConfigError unless every entry is finite and the rotation is
  /// orthonormal with determinant +1 (tolerance 1e-6).
  void validate() const;
};

struct EulerAngles {
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
  friend bool operator==(const EulerAngles&, const EulerAngles&) = default;
};

/// Inverse of RigidTransform::from_euler_deg for pitch within (-90, 90).
EulerAngles to_euler_deg(const Mat3& rotation);

double deg_to_rad(double deg);
double rad_to_deg(double rad);

}  // namespace facedepth
