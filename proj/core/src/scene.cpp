#include "viscobeam/scene.hpp"

#include "viscobeam/so3.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

namespace viscobeam::scene {

TimeFunction::TimeFunction(std::vector<std::pair<double, double>> points)
    : points_(std::move(points)) {
  if (points_.empty()) throw ContractError("time function: needs at least one breakpoint");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].first > points_[i - 1].first)) {
      throw ContractError("time function: breakpoints must increase");
    }
  }
}

double TimeFunction::operator()(double t) const {
  if (t <= points_.front().first) return points_.front().second;
  if (t >= points_.back().first) return points_.back().second;
  auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                             [](double v, const auto& p) { return v < p.first; });
  const auto lo = hi - 1;
  const double w = (t - lo->first) / (hi->first - lo->first);
  return (1.0 - w) * lo->second + w * hi->second;
}

TimeFunction TimeFunction::ramp(double v, double t_ramp) {
  return TimeFunction({{0.0, 0.0}, {t_ramp, v}});
}

Vec3 eval_terms(const std::vector<LoadTerm>& terms, double t) {
  Vec3 out = Vec3::Zero();
  for (const auto& term : terms) out += term.eval(t);
  return out;
}

int Scene::add_patch(ScenePatch p) {
  finalized_ = false;
  patches_.push_back(std::move(p));
  return static_cast<int>(patches_.size()) - 1;
}

int Scene::add_joint(Joint j) {
  finalized_ = false;
  joints_.push_back(std::move(j));
  return static_cast<int>(joints_.size()) - 1;
}

int Scene::num_dofs() const {
  int n = 0;
  for (const auto& sp : patches_) n += sp.patch.num_dofs();
  return n;
}

int Scene::patch_offset(int i) const {
  int n = 0;
  for (int k = 0; k < i; ++k) n += patches_[k].patch.num_dofs();
  return n;
}

namespace {

int end_site(const Patch& p, bool at_end) { return at_end ? p.num_controls() - 1 : 0; }

double end_u(const Patch& p, bool at_end) { return p.sites()[end_site(p, at_end)].u; }

}  // namespace

void Scene::finalize() {
  joint_rel_rot_.assign(joints_.size(), {});
  std::map<std::pair<int, int>, int> owner;
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    const Joint& joint = joints_[j];
    if (joint.members.size() < 2) throw ContractError("joint: needs at least two members");
    for (const auto& m : joint.members) {
      if (m.patch < 0 || m.patch >= static_cast<int>(patches_.size())) {
        throw ContractError("joint: member patch id out of range");
      }
      const auto key = std::make_pair(m.patch, m.at_end ? 1 : 0);
      if (owner.count(key)) throw ContractError("joint: patch end belongs to two joints");
      owner[key] = static_cast<int>(j);
    }
    const Patch& p0 = patches_[joint.members[0].patch].patch;
    const Vec3 x0 = p0.reference_curve().point(end_u(p0, joint.members[0].at_end));
    const Mat3 r0 = p0.reference_points()[end_site(p0, joint.members[0].at_end)].R0;
    for (std::size_t e = 1; e < joint.members.size(); ++e) {
      const Patch& pe = patches_[joint.members[e].patch].patch;
      const Vec3 xe = pe.reference_curve().point(end_u(pe, joint.members[e].at_end));
      if ((xe - x0).norm() > 1e-8) {
        throw GeometryError("joint: member reference positions do not coincide");
      }
      const Mat3 re = pe.reference_points()[end_site(pe, joint.members[e].at_end)].R0;
      joint_rel_rot_[j].push_back(r0.transpose() * re);
    }
  }
  finalized_ = true;
}

void Scene::assemble_joint(std::size_t jidx, double t,
                           std::vector<Eigen::Triplet<double>>& trip, VecX& rhs) const {
  const Joint& joint = joints_[jidx];

  struct MemberData {
    const Patch* patch;
    int site;
    int row;       // row block of this member's end
    int col_base;  // patch dof offset
    double sign;   // +1 at the u=1 end, -1 at the u=0 end
    Mat3 r;
    Vec3 n_hat, m_hat;   // spatial internal force/couple, time-discrete
    Mat3 dn_dtheta, dn_deta_s, dm_dtheta_s, dm_dtheta;
  };
  std::vector<MemberData> md;
  md.reserve(joint.members.size());
  for (const auto& m : joint.members) {
    const Patch& p = patches_[m.patch].patch;
    MemberData d;
    d.patch = &p;
    d.site = end_site(p, m.at_end);
    d.col_base = patch_offset(m.patch);
    d.row = d.col_base + 6 * d.site;
    d.sign = m.at_end ? 1.0 : -1.0;
    const kinematics::PointState& st = p.states()[d.site];
    const auto& eff = p.step_eff;
    const auto& ct = p.tensors();
    const auto& beta = p.step_beta[d.site];
    Vec3 sbg = Vec3::Zero(), sbk = Vec3::Zero();
    for (std::size_t a = 0; a < ct.tau.size(); ++a) {
      sbg += ct.Cn_v[a].cwiseProduct(beta.gamma[a]);
      sbk += ct.Cm_v[a].cwiseProduct(beta.kappa[a]);
    }
    const Vec3 n_mat = eff.Cn.cwiseProduct(st.gamma) - sbg;
    const Vec3 m_mat = eff.Cm.cwiseProduct(st.kappa) - sbk;
    d.r = st.R;
    d.n_hat = st.R * n_mat;
    d.m_hat = st.R * m_mat;
    const Vec3 g = st.R.transpose() * st.c_s;
    d.dn_dtheta = st.R * (Mat3(eff.Cn.asDiagonal()) * so3::skew(g) - so3::skew(n_mat));
    d.dn_deta_s = st.R * Mat3(eff.Cn.asDiagonal()) * st.R.transpose();
    d.dm_dtheta_s = st.R * Mat3(eff.Cm.asDiagonal());
    d.dm_dtheta = st.R * (Mat3(eff.Cm.asDiagonal()) * so3::skew(st.curv) - so3::skew(m_mat));
    md.push_back(std::move(d));
  }

  auto scatter = [&](int row, int col, const Mat3& b) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        if (b(r, c) != 0.0) trip.emplace_back(row + r, col + c, b(r, c));
      }
    }
  };
  auto for_each_control = [&](const MemberData& d, auto&& fn) {
    const int p = d.patch->degree();
    const CollocationSite& s = d.patch->sites()[d.site];
    for (int j = 0; j <= p; ++j) {
      const int col = d.col_base + 6 * (s.span - p + j);
      const double n0 = s.basis0[j];
      const double n1s = s.basis1[j] / s.jac;
      fn(col, n0, n1s);
    }
  };

  // Equilibrium rows in member 0's block: sum of oriented member end
  // resultants balances the applied joint load.
  const MemberData& m0 = md[0];
  Vec3 rhs_f = eval_terms(joint.forces, t);
  Vec3 rhs_m = eval_terms(joint.couples, t);
  for (const MemberData& d : md) {
    rhs_f -= d.sign * d.n_hat;
    rhs_m -= d.sign * d.m_hat;
    for_each_control(d, [&](int col, double n0, double n1s) {
      scatter(m0.row, col, (d.sign * n1s * d.dn_deta_s).eval());
      scatter(m0.row, col + 3, (d.sign * n0 * d.dn_dtheta).eval());
      scatter(m0.row + 3, col + 3,
              (d.sign * (n1s * d.dm_dtheta_s + n0 * d.dm_dtheta)).eval());
    });
  }
  rhs.segment<3>(m0.row) = rhs_f;
  rhs.segment<3>(m0.row + 3) = rhs_m;

  // Continuity rows in the other members' blocks: equal incremental
  // displacements, locked relative rotations (gap closed through the rhs).
  const Vec3 c0 = m0.patch->current_curve().point(m0.patch->sites()[m0.site].u);
  for (std::size_t e = 1; e < md.size(); ++e) {
    const MemberData& de = md[e];
    const Mat3& q = joint_rel_rot_[jidx][e - 1];
    const Vec3 ce = de.patch->current_curve().point(de.patch->sites()[de.site].u);
    const Mat3 r0q = m0.r * q;
    for_each_control(de, [&](int col, double n0, double) {
      scatter(de.row, col, (n0 * Mat3::Identity()).eval());
      scatter(de.row + 3, col + 3, (-n0 * r0q).eval());
    });
    for_each_control(m0, [&](int col, double n0, double) {
      scatter(de.row, col, (-n0 * Mat3::Identity()).eval());
      scatter(de.row + 3, col + 3, (n0 * m0.r).eval());
    });
    rhs.segment<3>(de.row) = c0 - ce;
    rhs.segment<3>(de.row + 3) = -so3::log_map(r0q * de.r.transpose());
  }
}

assembly::GlobalSystem Scene::assemble(double t) const {
  if (!finalized_) throw ContractError("scene: finalize() before assembling");
  assembly::GlobalSystem sys;
  const int n = num_dofs();
  sys.rhs = VecX::Zero(n);
  std::vector<Eigen::Triplet<double>> trip;

  std::vector<std::pair<bool, bool>> joint_managed(patches_.size(), {false, false});
  for (const auto& joint : joints_) {
    for (const auto& m : joint.members) {
      (m.at_end ? joint_managed[m.patch].second : joint_managed[m.patch].first) = true;
    }
  }

  for (std::size_t i = 0; i < patches_.size(); ++i) {
    const ScenePatch& sp = patches_[i];
    assembly::PointLoads loads;
    loads.f_dist = eval_terms(sp.distributed_forces, t);
    loads.m_dist = eval_terms(sp.distributed_couples, t);

    auto resolve = [&](const BoundarySpec& bc, bool at_end, bool managed) {
      assembly::ResolvedEnd re;
      re.joint_managed = managed;
      re.dirichlet_translation = bc.dirichlet_translation;
      re.dirichlet_rotation = bc.dirichlet_rotation;
      const double sign = at_end ? 1.0 : -1.0;  // applied load -> boundary internal force
      re.translation_value = bc.dirichlet_translation ? eval_terms(bc.translations, t)
                                                      : sign * eval_terms(bc.forces, t);
      re.rotation_value = bc.dirichlet_rotation ? eval_terms(bc.rotations, t)
                                                : sign * eval_terms(bc.couples, t);
      return re;
    };
    const auto start = resolve(sp.start, false, joint_managed[i].first);
    const auto end = resolve(sp.end, true, joint_managed[i].second);
    assembly::assemble_patch(sp.patch, loads, start, end, patch_offset(static_cast<int>(i)),
                             trip, sys.rhs);
  }

  for (std::size_t j = 0; j < joints_.size(); ++j) assemble_joint(j, t, trip, sys.rhs);

  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

void Scene::apply_increment(const VecX& delta) {
  int off = 0;
  for (auto& sp : patches_) {
    sp.patch.apply_increment(delta.segment(off, sp.patch.num_dofs()));
    off += sp.patch.num_dofs();
  }
}

Scene::Snapshot Scene::snapshot() const {
  Snapshot s;
  for (const auto& sp : patches_) {
    s.controls.push_back(sp.patch.current_curve().control_points());
    s.states.push_back(sp.patch.states());
    s.dissipated.push_back(sp.patch.dissipated);
  }
  return s;
}

void Scene::restore(const Snapshot& snap) {
  for (std::size_t i = 0; i < patches_.size(); ++i) {
    Patch& p = patches_[i].patch;
    p.current_curve().control_points() = snap.controls[i];
    p.states() = snap.states[i];
    p.dissipated = snap.dissipated[i];
  }
}

double Scene::total_dissipated() const {
  double d = 0.0;
  for (const auto& sp : patches_) d += sp.patch.dissipated;
  return d;
}

namespace {

// Groups non-excluded patch ends by coincident reference position.
struct EndRef {
  int patch;
  bool at_end;
  Vec3 x;
};

std::vector<std::vector<EndRef>> group_ends(const std::vector<EndRef>& ends, double tol) {
  std::vector<std::vector<EndRef>> groups;
  std::vector<bool> used(ends.size(), false);
  for (std::size_t i = 0; i < ends.size(); ++i) {
    if (used[i]) continue;
    std::vector<EndRef> g{ends[i]};
    used[i] = true;
    for (std::size_t k = i + 1; k < ends.size(); ++k) {
      if (!used[k] && (ends[k].x - ends[i].x).norm() < tol) {
        g.push_back(ends[k]);
        used[k] = true;
      }
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

nurbs::NurbsCurve fit_analytic(const std::function<Vec3(double)>& f, double a, double b,
                               int degree, int n_controls) {
  const int n_samples = std::max(12 * n_controls, 200);
  std::vector<Vec3> pts;
  pts.reserve(n_samples + 1);
  for (int i = 0; i <= n_samples; ++i) {
    pts.push_back(f(a + (b - a) * i / n_samples));
  }
  return nurbs::fit_curve(nurbs::chord_length_samples(pts), degree, n_controls).curve;
}

}  // namespace

Scene build_planar_net(int n1, int n2, const material::CrossSection& section,
                       const material::MaxwellMaterial& mat, const NetDiscretization& disc,
                       const LoadTerm& tip_couple) {
  if (n1 < 1 || n2 < 1) throw ContractError("planar net: subdivisions must be >= 1");
  const double cm = 0.01;  // the cell formula lives on a centimeter grid
  Scene scene;
  for (int k = 1; k <= n1; ++k) {
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    for (int j = 1; j <= n2; ++j) {
      auto curve = fit_analytic(
          [&](double s) {
            return Vec3(cm * 1.5 * s, cm * (sgn * std::sin(s - 0.5 * std::numbers::pi) + 2.0 * (k - 1)),
                        0.0);
          },
          (j - 1) * std::numbers::pi, j * std::numbers::pi, disc.degree, disc.n_controls);
      scene.add_patch(ScenePatch(Patch(std::move(curve), mat, section)));
    }
  }

  // Clamp the x1 = 0 edge; detect joints among the remaining ends.
  const double x1_max = cm * 1.5 * n2 * std::numbers::pi;
  std::vector<EndRef> ends;
  for (int i = 0; i < static_cast<int>(scene.patches().size()); ++i) {
    Patch& p = scene.patches()[i].patch;
    for (bool at_end : {false, true}) {
      const Vec3 x = p.reference_curve().point(at_end ? 1.0 : 0.0);
      if (std::abs(x.x()) < 1e-10) {
        (at_end ? scene.patches()[i].end : scene.patches()[i].start) = BoundarySpec::clamped();
      } else {
        ends.push_back(EndRef{i, at_end, x});
      }
    }
  }
  for (auto& g : group_ends(ends, 1e-8)) {
    if (g.size() < 2) continue;
    Joint joint;
    for (const auto& e : g) joint.members.push_back({e.patch, e.at_end});
    if (std::abs(g.front().x.x() - x1_max) < 1e-9) {
      joint.couples.push_back(tip_couple);
    }
    scene.add_joint(std::move(joint));
  }
  scene.finalize();
  return scene;
}

Scene build_tubular_net(int n_w, double R, double r, const material::CrossSection& section,
                        const material::MaxwellMaterial& mat, const NetDiscretization& disc,
                        const TimeFunction& radial_force, int n_pairs) {
  if (n_w < 2) throw ContractError("tubular net: needs at least two patches per wire");
  if (!(R > 0.0 && r > 0.0 && r < R)) throw ContractError("tubular net: invalid radii");
  const double pitch = std::tan(std::numbers::pi / 6.0);
  const double span = 0.5 * std::numbers::pi;  // quarter turn per patch
  Scene scene;
  for (int handed = 0; handed < 2; ++handed) {
    const double dir = handed == 0 ? 1.0 : -1.0;
    for (int l = 0; l < n_pairs; ++l) {
      const double phase = 2.0 * std::numbers::pi * l / n_pairs;
      for (int i = 0; i < n_w; ++i) {
        auto curve = fit_analytic(
            [&](double th) {
              const double rho = R + r * std::cos(4.0 * th);
              const double psi = dir * th + phase;
              return Vec3(rho * std::cos(psi), rho * std::sin(psi), R * th * pitch);
            },
            i * span, (i + 1) * span, disc.degree, disc.n_controls);
        scene.add_patch(ScenePatch(Patch(std::move(curve), mat, section)));
      }
    }
  }

  const double z_max = R * n_w * span * pitch;
  const double z_mid = 0.5 * z_max;
  std::vector<EndRef> ends;
  for (int i = 0; i < static_cast<int>(scene.patches().size()); ++i) {
    Patch& p = scene.patches()[i].patch;
    for (bool at_end : {false, true}) {
      const Vec3 x = p.reference_curve().point(at_end ? 1.0 : 0.0);
      if (std::abs(x.z()) < 1e-10 || std::abs(x.z() - z_max) < 1e-10) {
        (at_end ? scene.patches()[i].end : scene.patches()[i].start) = BoundarySpec::clamped();
      } else {
        ends.push_back(EndRef{i, at_end, x});
      }
    }
  }
  for (auto& g : group_ends(ends, 1e-8)) {
    if (g.size() < 2) continue;
    Joint joint;
    for (const auto& e : g) joint.members.push_back({e.patch, e.at_end});
    if (std::abs(g.front().x.z() - z_mid) < 1e-9) {
      const Vec3 radial = Vec3(g.front().x.x(), g.front().x.y(), 0.0).normalized();
      joint.forces.push_back(LoadTerm{radial, radial_force});
    }
    scene.add_joint(std::move(joint));
  }
  scene.finalize();
  return scene;
}

}  // namespace viscobeam::scene
