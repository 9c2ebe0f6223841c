#pragma once

#include <viscobeam/types.hpp>

namespace viscobeam::so3 {

/// Skew-symmetric matrix such that skew(v) * h = v x h.
Mat3 skew(const Vec3& v);

/// Axial vector of a skew-symmetric matrix; inverse of skew().
/// Throws ContractError if the input is not skew-symmetric.
Vec3 axial(const Mat3& s);

/// True if R is proper orthogonal within tol.
bool is_rotation(const Mat3& r, double tol = 1e-12);

/// Rodrigues rotation about the vector theta (angle = |theta|).
/// Switches to a truncated series of the two trigonometric
/// coefficients below |theta| = 1e-4 to avoid cancellation.
Mat3 exp_map(const Vec3& theta);

/// Rotation vector of R with angle in [0, pi].
Vec3 log_map(const Mat3& r);

/// Closest rotation matrix (polar projection).
Mat3 orthonormalize(const Mat3& r);

/// Derivative along arc length of s -> exp(skew(theta(s))) evaluated at a
/// point where the field has value theta and derivative theta_s.
Mat3 dexp_along(const Vec3& theta, const Vec3& theta_s);

/// exp(skew(theta(s))) together with its first and second arc-length
/// derivatives, for a field with local jet (theta, theta_s, theta_ss).
struct ExpJet {
  Mat3 value;
  Mat3 d1;
  Mat3 d2;
};
ExpJet exp_jet(const Vec3& theta, const Vec3& theta_s, const Vec3& theta_ss);

/// Multiplicative rotation update R * exp(skew(dtheta)); re-orthonormalizes
/// by polar projection when orthogonality drift exceeds 1e-12.
Mat3 update_rotation(const Mat3& r, const Vec3& dtheta);

/// Curvature update consistent with the multiplicative rotation update:
///   K_new = exp(-dT) K_old exp(dT) + exp(-dT) d/ds exp(dT),  dT = skew(dtheta).
/// The result is skew-symmetrized.
Mat3 update_curvature(const Mat3& curv_old, const Vec3& dtheta, const Vec3& dtheta_s);

/// Arc-length derivative of the updated curvature; needs the local jet of
/// the incremental rotation field up to second order.
Mat3 update_curvature_s(const Mat3& curv_old, const Mat3& curv_old_s,
                        const Vec3& dtheta, const Vec3& dtheta_s, const Vec3& dtheta_ss);

}  // namespace viscobeam::so3
