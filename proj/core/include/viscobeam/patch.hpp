#pragma once

#include <viscobeam/kinematics.hpp>
#include <viscobeam/material.hpp>
#include <viscobeam/nurbs.hpp>
#include <viscobeam/types.hpp>

#include <vector>

namespace viscobeam {

/// Fixed per-collocation-point discretization data.  Basis values depend
/// only on the knot vector, so they are computed once; the Jacobian maps
/// parametric derivatives to derivatives in the reference arc length.
struct CollocationSite {
  double u = 0.0;
  int span = 0;
  VecX basis0, basis1, basis2;  // parametric values/derivatives, size degree+1
  double jac = 1.0;
  double jac_u = 0.0;
};

/// One beam patch: geometry, constitutive tensors, collocation data and the
/// per-point states.  The unknown layout is (d_eta_j, d_theta_j) per control
/// point, 6 unknowns per control, 6 collocated rows per Greville point.
class Patch {
 public:
  Patch(nurbs::NurbsCurve curve, material::MaxwellMaterial mat,
        material::CrossSection section, kinematics::FrameOptions frame = {});

  int degree() const { return cur_curve_.degree(); }
  int num_controls() const { return static_cast<int>(cur_curve_.num_controls()); }
  int num_dofs() const { return 6 * num_controls(); }

  const nurbs::NurbsCurve& reference_curve() const { return ref_curve_; }
  const nurbs::NurbsCurve& current_curve() const { return cur_curve_; }
  nurbs::NurbsCurve& current_curve() { return cur_curve_; }
  const std::vector<CollocationSite>& sites() const { return sites_; }
  const std::vector<kinematics::ReferencePoint>& reference_points() const { return ref_points_; }
  const std::vector<kinematics::PointState>& states() const { return states_; }
  std::vector<kinematics::PointState>& states() { return states_; }
  const material::ConstitutiveTensors& tensors() const { return tensors_; }
  const material::MaxwellMaterial& material_model() const { return material_; }
  const material::CrossSection& section() const { return section_; }

  /// Resets the current configuration to the reference one (virgin history).
  void reset();

  /// Applies a solved increment (size 6n): moves control points, updates
  /// rotations and curvatures multiplicatively, refreshes curve derivatives
  /// and strain measures at every collocation point.
  void apply_increment(const VecX& delta);

  /// Displacement of the axis point at parameter u relative to the
  /// reference configuration.
  Vec3 displacement(double u) const;

  /// Rotation vector (relative to the reference frame) at the collocation
  /// point nearest to u.
  Vec3 rotation_vector(double u) const;

  /// Per-step frozen data set by solver::begin_step.
  material::EffectiveTensors step_eff;
  std::vector<material::BetaTerms> step_beta;  // one per collocation point
  double step_dt = 0.0;

  /// Cumulative dissipated energy (integrated over the patch length).
  double dissipated = 0.0;

 private:
  nurbs::NurbsCurve ref_curve_;
  nurbs::NurbsCurve cur_curve_;
  material::MaxwellMaterial material_;
  material::CrossSection section_;
  material::ConstitutiveTensors tensors_;
  std::vector<CollocationSite> sites_;
  std::vector<kinematics::ReferencePoint> ref_points_;
  std::vector<kinematics::PointState> states_;

  void refresh_curve_derivatives(std::size_t i);
};

}  // namespace viscobeam
