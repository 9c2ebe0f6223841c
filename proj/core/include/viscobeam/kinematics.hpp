#pragma once

#include <viscobeam/material.hpp>
#include <viscobeam/nurbs.hpp>
#include <viscobeam/types.hpp>

#include <optional>
#include <vector>

namespace viscobeam::kinematics {

/// Reference configuration at one collocation point.  Arc-length s is the
/// arc length of the reference curve; tangents are unit by construction.
struct ReferencePoint {
  Mat3 R0 = Mat3::Identity();
  Vec3 curv0 = Vec3::Zero();    // axial of R0^T R0,s
  Vec3 curv0_s = Vec3::Zero();
  Vec3 c_s = Vec3::UnitX();
  Vec3 c_ss = Vec3::Zero();
  Vec3 gamma0 = Vec3::Zero();   // R0^T c0,s - e1
  Vec3 gamma0_hat_s = Vec3::Zero();  // curv0_skew^T (R0^T c0,s) + R0^T c0,ss
};

/// Current configuration and strain record at one collocation point.
struct PointState {
  Mat3 R = Mat3::Identity();
  Vec3 curv = Vec3::Zero();     // axial of R^T R,s
  Vec3 curv_s = Vec3::Zero();
  Vec3 c_s = Vec3::UnitX();
  Vec3 c_ss = Vec3::Zero();
  Vec3 gamma = Vec3::Zero();    // axial/shear strain measure
  Vec3 kappa = Vec3::Zero();    // torsional/bending strain measure
  Vec3 gamma_s = Vec3::Zero();
  Vec3 kappa_s = Vec3::Zero();
  material::PointHistory hist;
};

struct FrameOptions {
  /// Direction used to seed the section frame at the patch start; when
  /// absent, the coordinate axis least aligned with the start tangent.
  std::optional<Vec3> initial_director;
};

/// Builds the reference state at the given parametric sites by marching a
/// smallest-rotation frame along the curve.  Frenet frames are not used, so
/// vanishing-curvature points are harmless.
std::vector<ReferencePoint> build_reference(const nurbs::NurbsCurve& curve,
                                            const std::vector<double>& sites,
                                            const FrameOptions& options = {});

struct Strains {
  Vec3 gamma, kappa;
};

/// Strain measures relative to the reference point.
Strains strains(const Mat3& r, const Vec3& c_s, const Vec3& curv, const ReferencePoint& ref);

/// Arc-length derivatives of the strain measures.
Strains strain_derivatives(const Mat3& r, const Vec3& curv, const Vec3& curv_s,
                           const Vec3& c_s, const Vec3& c_ss, const ReferencePoint& ref);

/// Refreshes gamma/kappa and their derivatives from the kinematic fields
/// already stored in the state.
void refresh_strains(PointState& st, const ReferencePoint& ref);

}  // namespace viscobeam::kinematics
