#pragma once

#include <viscobeam/types.hpp>

#include <vector>

namespace viscobeam::material {

/// Cross-section constants: area, shear areas (correction factor included),
/// torsion constant and the two bending inertias.
struct CrossSection {
  double A;
  double A2;
  double A3;
  double Jt;
  double J2;
  double J3;

  void validate() const;

  /// Rectangle with dimensions b2 along the section 2-axis and b3 along the
  /// 3-axis.  Shear correction 5/6; Saint-Venant torsion constant from the
  /// standard series.
  static CrossSection rectangle(double b2, double b3);
  static CrossSection square(double side) { return rectangle(side, side); }

  /// Solid circle of diameter d.  Shear correction 0.9; Jt = pi d^4 / 32.
  static CrossSection circle(double diameter);
};

struct MaxwellBranch {
  double E;    // branch Young modulus [N/m^2]
  double tau;  // relaxation time [s]
};

/// Long-term modulus plus Maxwell branches; constant Poisson ratio, shear
/// moduli derived as G = E / (2 (1 + nu)).
struct MaxwellMaterial {
  double E_inf = 0.0;
  double nu = 0.0;
  std::vector<MaxwellBranch> branches;

  void validate() const;
  double G_inf() const { return E_inf / (2.0 * (1.0 + nu)); }
  double G_branch(std::size_t a) const { return branches[a].E / (2.0 * (1.0 + nu)); }
  std::size_t num_branches() const { return branches.size(); }
};

/// Diagonal constitutive tensors, stored as their diagonals.
struct ConstitutiveTensors {
  Vec3 Cn_inf, Cm_inf;               // long-term
  Vec3 Cn_inst, Cm_inst;             // instantaneous (long-term + all branches)
  std::vector<Vec3> Cn_v, Cm_v;      // per-branch
  std::vector<double> tau;
};

ConstitutiveTensors elastic_tensors(const MaxwellMaterial& mat, const CrossSection& sec);

/// Time-step-effective tensors: instantaneous minus the trapezoidal branch
/// reductions dt / (2 tau + dt).
struct EffectiveTensors {
  Vec3 Cn, Cm;
};
EffectiveTensors effective_tensors(const ConstitutiveTensors& ct, double dt);

/// Strain-like record at one collocation point carried across time steps:
/// previous-step totals and per-branch viscous strains, values and
/// arc-length derivatives.
struct PointHistory {
  Vec3 gamma_prev = Vec3::Zero();
  Vec3 kappa_prev = Vec3::Zero();
  Vec3 gamma_s_prev = Vec3::Zero();
  Vec3 kappa_s_prev = Vec3::Zero();
  std::vector<Vec3> gamma_v, kappa_v, gamma_v_s, kappa_v_s;

  PointHistory(std::size_t n_branches = 0)
      : gamma_v(n_branches, Vec3::Zero()),
        kappa_v(n_branches, Vec3::Zero()),
        gamma_v_s(n_branches, Vec3::Zero()),
        kappa_v_s(n_branches, Vec3::Zero()) {}
};

/// Per-branch history terms entering the current step; they depend only on
/// the previous step, so they stay frozen during the Newton iteration.
struct BetaTerms {
  std::vector<Vec3> gamma, kappa, gamma_s, kappa_s;
};
BetaTerms history_beta(const ConstitutiveTensors& ct, double dt, const PointHistory& hist);

/// Trapezoidal update of the per-branch viscous strains at the end of a
/// converged step with totals (gamma, kappa) and their derivatives.
void update_viscous(const ConstitutiveTensors& ct, double dt,
                    const Vec3& gamma, const Vec3& kappa,
                    const Vec3& gamma_s, const Vec3& kappa_s,
                    const BetaTerms& beta, PointHistory& hist);

/// Material stress resultants N (force) and M (couple).
struct StressResultants {
  Vec3 n, m;
};
StressResultants internal_forces(const ConstitutiveTensors& ct,
                                 const Vec3& gamma, const Vec3& kappa,
                                 const PointHistory& hist);

/// Energy density dissipated over one step (per unit reference length),
/// from the midpoint viscous strain rates; nonnegative, zero for dt = 0.
double dissipation_increment(const ConstitutiveTensors& ct, double dt,
                             const PointHistory& before, const PointHistory& after);

}  // namespace viscobeam::material
