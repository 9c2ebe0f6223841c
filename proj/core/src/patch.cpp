#include "viscobeam/patch.hpp"

#include "viscobeam/so3.hpp"

#include <cmath>
#include <limits>

namespace viscobeam {

Patch::Patch(nurbs::NurbsCurve curve, material::MaxwellMaterial mat,
             material::CrossSection section, kinematics::FrameOptions frame)
    : ref_curve_(curve),
      cur_curve_(std::move(curve)),
      material_(std::move(mat)),
      section_(section),
      tensors_(material::elastic_tensors(material_, section_)) {
  const int p = cur_curve_.degree();
  if (p < 2) throw ContractError("patch: field equations need degree >= 2");

  const std::vector<double> gre = nurbs::greville(cur_curve_.knots(), p);
  const std::vector<double>& w = cur_curve_.weights();
  sites_.reserve(gre.size());
  for (double u : gre) {
    CollocationSite s;
    s.u = u;
    const nurbs::BasisTable t = nurbs::basis_eval(cur_curve_.knots(), w, p, u, 2);
    s.span = t.span;
    s.basis0 = t.ders.row(0).transpose();
    s.basis1 = t.ders.row(1).transpose();
    s.basis2 = t.ders.row(2).transpose();
    const nurbs::Jacobian j = nurbs::jacobian(ref_curve_, u);
    s.jac = j.j;
    s.jac_u = j.j_u;
    sites_.push_back(std::move(s));
  }

  ref_points_ = kinematics::build_reference(ref_curve_, gre, frame);
  reset();
}

void Patch::reset() {
  cur_curve_.control_points() = ref_curve_.control_points();
  states_.assign(sites_.size(), kinematics::PointState{});
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    kinematics::PointState& st = states_[i];
    const kinematics::ReferencePoint& rp = ref_points_[i];
    st.R = rp.R0;
    st.curv = rp.curv0;
    st.curv_s = rp.curv0_s;
    st.c_s = rp.c_s;
    st.c_ss = rp.c_ss;
    st.hist = material::PointHistory(tensors_.tau.size());
    kinematics::refresh_strains(st, rp);
  }
  step_beta.assign(sites_.size(), material::BetaTerms{});
  step_eff = material::effective_tensors(tensors_, 0.0);
  step_dt = 0.0;
  dissipated = 0.0;
}

void Patch::refresh_curve_derivatives(std::size_t i) {
  const CollocationSite& s = sites_[i];
  const auto d = cur_curve_.eval(s.u, 2);
  kinematics::PointState& st = states_[i];
  st.c_s = d[1] / s.jac;
  st.c_ss = d[2] / (s.jac * s.jac) - d[1] * s.jac_u / (s.jac * s.jac * s.jac);
}

void Patch::apply_increment(const VecX& delta) {
  if (delta.size() != num_dofs()) throw ContractError("apply_increment: size mismatch");
  auto& controls = cur_curve_.control_points();
  for (int j = 0; j < num_controls(); ++j) {
    controls[j] += delta.segment<3>(6 * j);
  }
  const int p = degree();
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const CollocationSite& s = sites_[i];
    Vec3 th = Vec3::Zero(), th_u = Vec3::Zero(), th_uu = Vec3::Zero();
    for (int j = 0; j <= p; ++j) {
      const Vec3 node = delta.segment<3>(6 * (s.span - p + j) + 3);
      th += s.basis0[j] * node;
      th_u += s.basis1[j] * node;
      th_uu += s.basis2[j] * node;
    }
    const Vec3 th_s = th_u / s.jac;
    const Vec3 th_ss = th_uu / (s.jac * s.jac) - th_u * s.jac_u / (s.jac * s.jac * s.jac);

    kinematics::PointState& st = states_[i];
    const Mat3 curv_skew = so3::skew(st.curv);
    const Mat3 curv_skew_s = so3::skew(st.curv_s);
    st.curv = so3::axial(so3::update_curvature(curv_skew, th, th_s));
    st.curv_s = so3::axial(so3::update_curvature_s(curv_skew, curv_skew_s, th, th_s, th_ss));
    st.R = so3::update_rotation(st.R, th);
    refresh_curve_derivatives(i);
    kinematics::refresh_strains(st, ref_points_[i]);
  }
}

Vec3 Patch::displacement(double u) const {
  return cur_curve_.point(u) - ref_curve_.point(u);
}

Vec3 Patch::rotation_vector(double u) const {
  std::size_t best = 0;
  double dist = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const double d = std::abs(sites_[i].u - u);
    if (d < dist) {
      dist = d;
      best = i;
    }
  }
  return so3::log_map(states_[best].R * ref_points_[best].R0.transpose());
}

}  // namespace viscobeam
