#include "viscobeam/assembly.hpp"

#include "viscobeam/so3.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <numbers>

namespace viscobeam::assembly {

namespace {

using so3::skew;

struct PointData {
  Mat3 ksk;        // current material curvature, skew
  Vec3 g;          // R^T c,s
  Vec3 gss;        // R^T c,ss
  Vec3 cn_gamma;   // effective force stiffness times gamma
  Vec3 cm_kappa;   // effective couple stiffness times kappa
  Vec3 sbg, sbg_s; // branch-weighted beta sums, force side
  Vec3 sbk, sbk_s; // branch-weighted beta sums, couple side
  Vec3 f_mat, m_mat;
};

PointData gather(const kinematics::PointState& st, const material::ConstitutiveTensors& ct,
                 const material::EffectiveTensors& eff, const material::BetaTerms& beta,
                 const PointLoads& loads) {
  PointData d;
  d.ksk = skew(st.curv);
  d.g = st.R.transpose() * st.c_s;
  d.gss = st.R.transpose() * st.c_ss;
  d.cn_gamma = eff.Cn.cwiseProduct(st.gamma);
  d.cm_kappa = eff.Cm.cwiseProduct(st.kappa);
  d.sbg = d.sbg_s = d.sbk = d.sbk_s = Vec3::Zero();
  for (std::size_t a = 0; a < ct.tau.size(); ++a) {
    d.sbg += ct.Cn_v[a].cwiseProduct(beta.gamma[a]);
    d.sbg_s += ct.Cn_v[a].cwiseProduct(beta.gamma_s[a]);
    d.sbk += ct.Cm_v[a].cwiseProduct(beta.kappa[a]);
    d.sbk_s += ct.Cm_v[a].cwiseProduct(beta.kappa_s[a]);
  }
  d.f_mat = st.R.transpose() * loads.f_dist;
  d.m_mat = st.R.transpose() * loads.m_dist;
  return d;
}

Residual residual_from(const PointData& d, const kinematics::PointState& st,
                       const material::EffectiveTensors& eff) {
  Residual r;
  r.f = d.ksk * (d.cn_gamma - d.sbg) + eff.Cn.cwiseProduct(st.gamma_s) - d.sbg_s + d.f_mat;
  r.t = d.ksk * (d.cm_kappa - d.sbk) + eff.Cm.cwiseProduct(st.kappa_s) - d.sbk_s
      + d.g.cross(d.cn_gamma - d.sbg) + d.m_mat;
  return r;
}

}  // namespace

Residual residual_point(const kinematics::PointState& st,
                        const material::ConstitutiveTensors& ct,
                        const material::EffectiveTensors& eff,
                        const material::BetaTerms& beta, const PointLoads& loads) {
  return residual_from(gather(st, ct, eff, beta, loads), st, eff);
}

PointBlocks tangent_point(const kinematics::PointState& st,
                          const material::ConstitutiveTensors& ct,
                          const material::EffectiveTensors& eff,
                          const material::BetaTerms& beta, const PointLoads& loads) {
  const PointData d = gather(st, ct, eff, beta, loads);
  const Mat3 cn = eff.Cn.asDiagonal();
  const Mat3 cm = eff.Cm.asDiagonal();
  const Mat3 rt = st.R.transpose();
  const Mat3 sk_g = skew(d.g);

  PointBlocks b;
  const Mat3 p_t = cn * sk_g - skew(d.cn_gamma) + skew(d.sbg);
  const Mat3 p_r = sk_g * cn - skew(d.cn_gamma) + skew(d.sbg);

  b.t_dtheta_s = p_t;
  b.t_dtheta = d.ksk * cn * sk_g - skew(d.cn_gamma) * d.ksk + d.ksk * skew(d.sbg)
             - skew(d.ksk * d.sbg) + cn * skew(d.gss) - cn * skew(d.ksk * d.g)
             + skew(d.f_mat);
  b.t_deta_ss = cn * rt;
  b.t_deta_s = d.ksk * cn * rt - cn * d.ksk * rt;

  b.r_dtheta_ss = cm;
  b.r_dtheta_s = cm * d.ksk + d.ksk * cm - skew(d.cm_kappa) + skew(d.sbk);
  b.r_dtheta = d.ksk * cm * d.ksk - skew(d.cm_kappa) * d.ksk + d.ksk * skew(d.sbk)
             - skew(d.ksk * d.sbk) + cm * skew(st.curv_s) + p_r * sk_g + skew(d.m_mat);
  b.r_deta_s = p_r * rt;

  const Residual r = residual_from(d, st, eff);
  b.rhs_f = -r.f;
  b.rhs_t = -r.t;
  return b;
}

NeumannRows bc_rows_neumann(const kinematics::PointState& st,
                            const material::ConstitutiveTensors& ct,
                            const material::EffectiveTensors& eff,
                            const material::BetaTerms& beta,
                            const Vec3& n_c, const Vec3& m_c) {
  PointData d = gather(st, ct, eff, beta, PointLoads{});
  const Mat3 cn = eff.Cn.asDiagonal();
  const Mat3 cm = eff.Cm.asDiagonal();
  const Vec3 n_mat = st.R.transpose() * n_c;
  const Vec3 m_mat = st.R.transpose() * m_c;

  NeumannRows rows;
  rows.f_dtheta = cn * skew(d.g) - skew(n_mat);
  rows.f_deta_s = cn * st.R.transpose();
  rows.f_rhs = d.sbg - d.cn_gamma + n_mat;
  rows.m_dtheta_s = cm;
  rows.m_dtheta = cm * d.ksk - skew(m_mat);
  rows.m_rhs = d.sbk - d.cm_kappa + m_mat;
  return rows;
}

DirichletGaps bc_rows_dirichlet(const Vec3& eta_bar, const Vec3& theta_bar,
                                const Mat3& r_current, const Mat3& r_reference,
                                const Vec3& c_current, const Vec3& c_reference) {
  DirichletGaps gaps;
  gaps.translation = eta_bar - (c_current - c_reference);
  const Mat3 target = so3::exp_map(theta_bar) * r_reference;
  gaps.rotation = so3::log_map(r_current.transpose() * target);
  if (gaps.rotation.norm() > std::numbers::pi - 1e-6) {
    throw GeometryError("dirichlet rotation: gap at the branch ambiguity (angle pi)");
  }
  return gaps;
}

namespace {

// Arc-length basis derivatives at a site.
struct ArcBasis {
  double n0, n1, n2;
};
ArcBasis arc_basis(const CollocationSite& s, int j) {
  const double j2 = s.jac * s.jac;
  return ArcBasis{s.basis0[j], s.basis1[j] / s.jac,
                  s.basis2[j] / j2 - s.basis1[j] * s.jac_u / (j2 * s.jac)};
}

void scatter_block(std::vector<Eigen::Triplet<double>>& trip, int row, int col, const Mat3& b) {
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (b(r, c) != 0.0) trip.emplace_back(row + r, col + c, b(r, c));
    }
  }
}

}  // namespace

void assemble_patch(const Patch& patch, const PointLoads& loads,
                    const ResolvedEnd& start, const ResolvedEnd& end, int offset,
                    std::vector<Eigen::Triplet<double>>& triplets, VecX& rhs) {
  const int p = patch.degree();
  const int n = patch.num_controls();
  const auto& sites = patch.sites();
  const auto& states = patch.states();
  const auto& ct = patch.tensors();

  for (int i = 0; i < n; ++i) {
    const CollocationSite& s = sites[i];
    const kinematics::PointState& st = states[i];
    const material::BetaTerms& beta = patch.step_beta[i];
    const int row = offset + 6 * i;
    const bool boundary = (i == 0 || i == n - 1);

    if (!boundary) {
      const PointBlocks b = tangent_point(st, ct, patch.step_eff, beta, loads);
      for (int j = 0; j <= p; ++j) {
        const ArcBasis ab = arc_basis(s, j);
        const int col = offset + 6 * (s.span - p + j);
        scatter_block(triplets, row, col, (b.t_deta_ss * ab.n2 + b.t_deta_s * ab.n1).eval());
        scatter_block(triplets, row, col + 3, (b.t_dtheta_s * ab.n1 + b.t_dtheta * ab.n0).eval());
        scatter_block(triplets, row + 3, col, (b.r_deta_s * ab.n1).eval());
        scatter_block(triplets, row + 3, col + 3,
                      (b.r_dtheta_ss * ab.n2 + b.r_dtheta_s * ab.n1 + b.r_dtheta * ab.n0).eval());
      }
      rhs.segment<3>(row) = b.rhs_f;
      rhs.segment<3>(row + 3) = b.rhs_t;
      continue;
    }

    const ResolvedEnd& cond = (i == 0) ? start : end;
    if (cond.joint_managed) continue;

    const bool both_dirichlet = cond.dirichlet_translation && cond.dirichlet_rotation;
    DirichletGaps gaps{Vec3::Zero(), Vec3::Zero()};
    if (cond.dirichlet_translation || cond.dirichlet_rotation) {
      gaps = bc_rows_dirichlet(cond.translation_value,
                               both_dirichlet ? cond.rotation_value : Vec3::Zero(), st.R,
                               patch.reference_points()[i].R0,
                               patch.current_curve().point(s.u),
                               patch.reference_curve().point(s.u));
    }
    NeumannRows neu;
    if (!cond.dirichlet_translation || !cond.dirichlet_rotation) {
      neu = bc_rows_neumann(st, ct, patch.step_eff, beta,
                            cond.dirichlet_translation ? Vec3::Zero() : cond.translation_value,
                            cond.dirichlet_rotation ? Vec3::Zero() : cond.rotation_value);
    }

    for (int j = 0; j <= p; ++j) {
      const ArcBasis ab = arc_basis(s, j);
      const int col = offset + 6 * (s.span - p + j);
      if (cond.dirichlet_translation) {
        scatter_block(triplets, row, col, (ab.n0 * Mat3::Identity()).eval());
      } else {
        scatter_block(triplets, row, col, (neu.f_deta_s * ab.n1).eval());
        scatter_block(triplets, row, col + 3, (neu.f_dtheta * ab.n0).eval());
      }
      if (cond.dirichlet_rotation) {
        scatter_block(triplets, row + 3, col + 3, (ab.n0 * Mat3::Identity()).eval());
      } else {
        scatter_block(triplets, row + 3, col + 3,
                      (neu.m_dtheta_s * ab.n1 + neu.m_dtheta * ab.n0).eval());
      }
    }
    rhs.segment<3>(row) = cond.dirichlet_translation ? gaps.translation : neu.f_rhs;
    rhs.segment<3>(row + 3) = cond.dirichlet_rotation ? gaps.rotation : neu.m_rhs;
  }
}

GlobalSystem assemble(const Patch& patch, const PointLoads& loads,
                      const ResolvedEnd& start, const ResolvedEnd& end) {
  GlobalSystem sys;
  const int n = patch.num_dofs();
  sys.rhs = VecX::Zero(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 6 * (patch.degree() + 1));
  assemble_patch(patch, loads, start, end, 0, trip, sys.rhs);
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

VecX solve_linear(const GlobalSystem& system) {
  const Eigen::Index n = system.matrix.rows();
  VecX x;
  if (n <= 600) {
    const MatX dense = MatX(system.matrix);
    x = Eigen::PartialPivLU<MatX>(dense).solve(system.rhs);
  } else {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(system.matrix);
    lu.factorize(system.matrix);
    if (lu.info() != Eigen::Success) {
      throw std::runtime_error("solve_linear: sparse factorization failed");
    }
    x = lu.solve(system.rhs);
  }
  const double scale = system.rhs.cwiseAbs().maxCoeff() +
                       x.cwiseAbs().maxCoeff() + 1e-300;
  const double res = (system.matrix * x - system.rhs).cwiseAbs().maxCoeff();
  if (!std::isfinite(res) || res > 1e-6 * scale) {
    throw std::runtime_error("solve_linear: singular or badly scaled system");
  }
  return x;
}

}  // namespace viscobeam::assembly
