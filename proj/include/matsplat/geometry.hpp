#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace matsplat {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Rigid transform x' = rotation * x + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }
  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }
};

inline constexpr double kRotationTolerance = 1e-6;

/// True when R^T R = I and det R = +1 within kRotationTolerance.
bool is_rotation(const Mat3& r, double tol = kRotationTolerance);

/// Rotation matrix from a (w, x, y, z) quaternion; the quaternion is normalized first.
Mat3 rotation_from_wxyz(double w, double x, double y, double z);

}  // namespace matsplat
