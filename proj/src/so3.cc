#include "rotavg/so3.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace rotavg {
namespace {

// (R - R^T)^vee, which equals 2 sin(theta) * axis.
Vector3 AxialVector(const Matrix3& r) {
  return Vector3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
}

// Flips `axis` so that its first component that is not numerically zero is
// positive.
Vector3 CanonicalAxisSign(const Vector3& axis) {
  constexpr double kZero = 1e-12;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(axis(i)) > kZero) {
      return axis(i) > 0 ? axis : Vector3(-axis);
    }
  }
  return axis;
}

}  // namespace

RotationMatrix RotationMatrix::FromMatrix(const Matrix3& m,
                                          const double tolerance) {
  if (!IsRotation(m, tolerance)) {
    throw std::invalid_argument("matrix is not a rotation");
  }
  return RotationMatrix(m);
}

bool IsRotation(const Matrix3& m, const double tolerance) {
  if (!m.allFinite()) {
    return false;
  }
  const double orthonormality = (m.transpose() * m - Matrix3::Identity()).norm();
  return orthonormality <= tolerance &&
         std::abs(m.determinant() - 1.0) <= tolerance;
}

Matrix3 Hat(const Vector3& v) {
  Matrix3 m;
  m << 0.0, -v(2), v(1),
       v(2), 0.0, -v(0),
       -v(1), v(0), 0.0;
  return m;
}

Vector3 Vee(const Matrix3& m) {
  if (!m.allFinite() || (m + m.transpose()).norm() > kRotationTolerance) {
    throw std::invalid_argument("vee of a matrix that is not skew-symmetric");
  }
  return Vector3(m(2, 1), m(0, 2), m(1, 0));
}

RotationMatrix ExpMap(const RotationVector& v) {
  if (!v.allFinite()) {
    throw std::invalid_argument("rotation vector is not finite");
  }
  const double theta2 = v.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a;  // sin(theta) / theta
  double b;  // (1 - cos(theta)) / theta^2
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Matrix3 k = Hat(v);
  return RotationMatrix(Matrix3::Identity() + a * k + b * k * k);
}

RotationVector LogMap(const RotationMatrix& rotation) {
  const Matrix3& r = rotation.matrix();
  const Vector3 axial = AxialVector(r);
  const double sin_theta = 0.5 * axial.norm();
  const double cos_theta = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(sin_theta, cos_theta);

  if (theta < kSmallAngle) {
    // theta / (2 sin(theta)) = 1/2 + theta^2 / 12 + O(theta^4)
    return (0.5 + theta * theta / 12.0) * axial;
  }
  if (std::numbers::pi - theta >= kNearPiAngle) {
    return (theta / (2.0 * sin_theta)) * axial;
  }

  // Near pi the axial vector vanishes. The symmetric part is
  // (1 - cos(theta)) * axis * axis^T + cos(theta) * I.
  const Matrix3 outer =
      0.5 * (r + r.transpose()) - cos_theta * Matrix3::Identity();
  int k = 0;
  outer.diagonal().maxCoeff(&k);
  Vector3 axis = outer.col(k).normalized();
  const double alignment = axis.dot(axial);
  if (std::abs(alignment) > 1e-12) {
    if (alignment < 0) {
      axis = -axis;
    }
  } else {
    axis = CanonicalAxisSign(axis);
  }
  return theta * axis;
}

RotationVector LogMap(const Matrix3& r) {
  return LogMap(RotationMatrix::FromMatrix(r));
}

double GeodesicDistance(const RotationMatrix& r1, const RotationMatrix& r2) {
  const Matrix3 relative = r1.matrix() * r2.matrix().transpose();
  const double sin_theta = 0.5 * AxialVector(relative).norm();
  const double cos_theta =
      std::clamp(0.5 * (relative.trace() - 1.0), -1.0, 1.0);
  return std::atan2(sin_theta, cos_theta);
}

double ChordalDistance(const RotationMatrix& r1, const RotationMatrix& r2) {
  return (r1.matrix() - r2.matrix()).norm();
}

double GeodesicToChordal(const double angle) {
  return 2.0 * std::numbers::sqrt2 * std::sin(0.5 * angle);
}

Projection ProjectToSO3(const Matrix3& m) {
  if (!m.allFinite()) {
    throw std::invalid_argument("cannot project a non-finite matrix");
  }
  const Eigen::JacobiSVD<Matrix3> svd(m,
                                      Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3 u = svd.matrixU();
  const Matrix3& v = svd.matrixV();
  const Vector3 sigma = svd.singularValues();

  const bool reflect = (u * v.transpose()).determinant() < 0;
  if (reflect) {
    u.col(2) = -u.col(2);
  }

  // The minimizer is unique iff sigma_2 + sign * sigma_3 > 0, where sign is
  // -1 when a reflection has to be undone.
  const double tolerance = 1e-12 * sigma(0);
  const double gap = reflect ? sigma(1) - sigma(2) : sigma(1) + sigma(2);

  Projection result;
  result.rotation = RotationMatrix(u * v.transpose());
  result.degenerate = sigma(0) == 0.0 || gap <= tolerance;
  return result;
}

Vector9 Vec(const Matrix3& m) { return Eigen::Map<const Vector9>(m.data()); }

Matrix3 VecInv(const Vector9& s) { return Eigen::Map<const Matrix3>(s.data()); }

}  // namespace rotavg
