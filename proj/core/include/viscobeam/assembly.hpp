#pragma once

#include <viscobeam/patch.hpp>
#include <viscobeam/types.hpp>

#include <Eigen/Sparse>

#include <vector>

namespace viscobeam::assembly {

/// Distributed loads, constant spatial vectors at the current time.
struct PointLoads {
  Vec3 f_dist = Vec3::Zero();  // [N/m]
  Vec3 m_dist = Vec3::Zero();  // [N*m/m]
};

struct Residual {
  Vec3 f, t;
};

/// Collocated residual of the time-discrete field equations at one point
/// (history terms frozen at the previous step).  Vanishes at convergence.
Residual residual_point(const kinematics::PointState& st,
                        const material::ConstitutiveTensors& ct,
                        const material::EffectiveTensors& eff,
                        const material::BetaTerms& beta, const PointLoads& loads);

/// Coefficient blocks of the linearized field equations at one point.
/// t_* rows: translational equation; r_* rows: rotational equation.
struct PointBlocks {
  Mat3 t_dtheta_s, t_dtheta, t_deta_ss, t_deta_s;
  Mat3 r_dtheta_ss, r_dtheta_s, r_dtheta, r_deta_s;
  Vec3 rhs_f, rhs_t;  // minus the point residual
};
PointBlocks tangent_point(const kinematics::PointState& st,
                          const material::ConstitutiveTensors& ct,
                          const material::EffectiveTensors& eff,
                          const material::BetaTerms& beta, const PointLoads& loads);

/// Linearized Neumann rows at an end point.  n_c/m_c are the boundary
/// values of the internal force/couple in the spatial frame; the caller is
/// responsible for the orientation sign (applied end loads enter with a
/// minus sign at the u = 0 end).
struct NeumannRows {
  Mat3 f_dtheta, f_deta_s;
  Vec3 f_rhs;
  Mat3 m_dtheta_s, m_dtheta;
  Vec3 m_rhs;
};
NeumannRows bc_rows_neumann(const kinematics::PointState& st,
                            const material::ConstitutiveTensors& ct,
                            const material::EffectiveTensors& eff,
                            const material::BetaTerms& beta,
                            const Vec3& n_c, const Vec3& m_c);

/// Right-hand sides of the incremental Dirichlet rows: the increments that
/// close the gap between the current end configuration and the prescribed
/// one.  eta_bar is the prescribed displacement of the end point, theta_bar
/// the prescribed rotation vector applied to the reference frame.
/// Throws GeometryError when the rotation gap is within 1e-6 of pi.
struct DirichletGaps {
  Vec3 translation, rotation;
};
DirichletGaps bc_rows_dirichlet(const Vec3& eta_bar, const Vec3& theta_bar,
                                const Mat3& r_current, const Mat3& r_reference,
                                const Vec3& c_current, const Vec3& c_reference);

/// Fully resolved boundary condition of one patch end at the current time.
struct ResolvedEnd {
  bool dirichlet_translation = true;
  bool dirichlet_rotation = true;
  Vec3 translation_value = Vec3::Zero();  // Dirichlet: displacement; Neumann: boundary force
  Vec3 rotation_value = Vec3::Zero();     // Dirichlet: rotation vector; Neumann: boundary couple
  bool joint_managed = false;             // rows written by the joint coupling instead
};

/// Square collocated system.  For multi-patch scenes the joint rows border
/// the per-patch bands.
struct GlobalSystem {
  Eigen::SparseMatrix<double> matrix;
  VecX rhs;
};

/// Scatters the 6n rows of one patch: field equations at interior Greville
/// points, boundary rows at the two ends.  Basis derivatives are converted
/// to arc length with the reference Jacobian.
void assemble_patch(const Patch& patch, const PointLoads& loads,
                    const ResolvedEnd& start, const ResolvedEnd& end, int offset,
                    std::vector<Eigen::Triplet<double>>& triplets, VecX& rhs);

/// Assembles a single free-standing patch into its own square system.
GlobalSystem assemble(const Patch& patch, const PointLoads& loads,
                      const ResolvedEnd& start, const ResolvedEnd& end);

/// Direct solve; dense LU below 600 unknowns, sparse LU above.
VecX solve_linear(const GlobalSystem& system);

}  // namespace viscobeam::assembly
