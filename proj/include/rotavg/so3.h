#pragma once

#include <Eigen/Core>

namespace rotavg {

using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;
using Vector9 = Eigen::Matrix<double, 9, 1>;

// Axis-angle vector theta * axis, in radians. Canonical representatives
// returned by LogMap have norm in [0, pi].
using RotationVector = Eigen::Vector3d;

// Maximum deviation tolerated by RotationMatrix validation, both for
// ||M^T M - I||_F and for |det(M) - 1|.
inline constexpr double kRotationTolerance = 1e-9;

// Below this angle Exp/Log use Taylor coefficients instead of the closed
// forms.
inline constexpr double kSmallAngle = 1e-4;

// When pi - theta drops below this, LogMap recovers the axis from the
// symmetric part of R.
inline constexpr double kNearPiAngle = 1e-6;

struct Projection;

// A 3x3 orthonormal matrix with determinant +1.
//
// Construction from an arbitrary matrix goes through FromMatrix, which
// rejects inputs outside kRotationTolerance. Group products and transposes
// of valid rotations are closed and are not re-validated.
class RotationMatrix {
 public:
  RotationMatrix() : m_(Matrix3::Identity()) {}

  // Throws std::invalid_argument if `m` is not a rotation within
  // `tolerance`.
  static RotationMatrix FromMatrix(const Matrix3& m,
                                   double tolerance = kRotationTolerance);

  static RotationMatrix Identity() { return RotationMatrix(); }

  const Matrix3& matrix() const { return m_; }
  double operator()(int row, int col) const { return m_(row, col); }

  RotationMatrix Transpose() const { return RotationMatrix(m_.transpose()); }
  RotationMatrix operator*(const RotationMatrix& other) const {
    return RotationMatrix(m_ * other.m_);
  }
  Vector3 operator*(const Vector3& v) const { return m_ * v; }

  bool operator==(const RotationMatrix& other) const { return m_ == other.m_; }

 private:
  friend RotationMatrix ExpMap(const RotationVector& v);
  friend Projection ProjectToSO3(const Matrix3& m);

  explicit RotationMatrix(const Matrix3& m) : m_(m) {}

  Matrix3 m_;
};

// True if ||M^T M - I||_F <= tolerance and |det(M) - 1| <= tolerance.
bool IsRotation(const Matrix3& m, double tolerance = kRotationTolerance);

// Skew-symmetric matrix with Hat(v) * w == v.cross(w).
Matrix3 Hat(const Vector3& v);

// Inverse of Hat. Throws std::invalid_argument if ||M + M^T||_F exceeds
// kRotationTolerance.
Vector3 Vee(const Matrix3& m);

// Rodrigues formula. Throws std::invalid_argument on non-finite input.
RotationMatrix ExpMap(const RotationVector& v);

// Returns the canonical rotation vector with angle in [0, pi]. At exactly
// theta = pi the axis sign is chosen so that its first nonzero component is
// positive.
RotationVector LogMap(const RotationMatrix& r);

// Validating overload for raw matrices.
RotationVector LogMap(const Matrix3& r);

// Angle of r1 * r2^T, in [0, pi].
double GeodesicDistance(const RotationMatrix& r1, const RotationMatrix& r2);

// ||r1 - r2||_F, which equals 2 sqrt(2) sin(geodesic / 2).
double ChordalDistance(const RotationMatrix& r1, const RotationMatrix& r2);

// Maps a geodesic angle to the equivalent chordal distance.
double GeodesicToChordal(double angle);

struct Projection {
  RotationMatrix rotation;
  // Set when the closest rotation is not unique, e.g. rank-deficient
  // inputs or a reflection with equal trailing singular values. `rotation`
  // is still one of the minimizers.
  bool degenerate = false;
};

// Closest rotation to `m` in the Frobenius norm, U W V^T with
// W = diag(1, 1, -1) iff det(U V^T) < 0.
Projection ProjectToSO3(const Matrix3& m);

// Column-major stacking: vec(M)[3 * col + row] = M(row, col).
Vector9 Vec(const Matrix3& m);
Matrix3 VecInv(const Vector9& s);

}  // namespace rotavg
