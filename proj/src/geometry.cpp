#include "facedepth/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "facedepth/error.hpp"

namespace facedepth {

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

RigidTransform RigidTransform::from_euler_deg(double yaw, double pitch, double roll,
                                              const Vec3& translation) {
  const Mat3 ry = Eigen::AngleAxisd(deg_to_rad(yaw), Vec3::UnitY()).toRotationMatrix();
  const Mat3 rx = Eigen::AngleAxisd(deg_to_rad(pitch), Vec3::UnitX()).toRotationMatrix();
  const Mat3 rz = Eigen::AngleAxisd(deg_to_rad(roll), Vec3::UnitZ()).toRotationMatrix();
  return {ry * rx * rz, translation};
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  return {rotation * rhs.rotation, rotation * rhs.translation + translation};
}

void RigidTransform::validate() const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw ConfigError("rigid transform has non-finite entries");
  }
  const double ortho_err = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-6) throw ConfigError("rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-6) {
    throw ConfigError("rotation determinant is not +1");
  }
}

EulerAngles to_euler_deg(const Mat3& r) {
  // R = Ry(a) Rx(b) Rz(c):
  //   r(1,2) = -sin b, r(0,2) = sin a cos b, r(2,2) = cos a cos b,
  //   r(1,0) = cos b sin c, r(1,1) = cos b cos c.
  const double pitch = std::asin(std::clamp(-r(1, 2), -1.0, 1.0));
  const double yaw = std::atan2(r(0, 2), r(2, 2));
  const double roll = std::atan2(r(1, 0), r(1, 1));
  return {rad_to_deg(yaw), rad_to_deg(pitch), rad_to_deg(roll)};
}

}  // namespace facedepth
