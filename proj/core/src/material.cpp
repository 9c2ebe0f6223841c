#include "viscobeam/material.hpp"

#include <cmath>
#include <numbers>

namespace viscobeam::material {

void CrossSection::validate() const {
  if (!(A > 0.0 && A2 > 0.0 && A3 > 0.0 && Jt > 0.0 && J2 > 0.0 && J3 > 0.0)) {
    throw ContractError("cross section: all constants must be positive");
  }
}

namespace {

// Saint-Venant torsion constant of a solid rectangle a x b (a >= b).
double rectangle_torsion(double a, double b) {
  double sum = 0.0;
  for (int k = 1; k <= 61; k += 2) {
    sum += std::tanh(0.5 * k * std::numbers::pi * a / b) / std::pow(k, 5);
  }
  return a * b * b * b * (1.0 / 3.0 - 64.0 / std::pow(std::numbers::pi, 5) * (b / a) * sum);
}

}  // namespace

CrossSection CrossSection::rectangle(double b2, double b3) {
  if (!(b2 > 0.0 && b3 > 0.0)) throw ContractError("rectangle: sides must be positive");
  CrossSection s{};
  s.A = b2 * b3;
  s.A2 = 5.0 / 6.0 * s.A;
  s.A3 = 5.0 / 6.0 * s.A;
  s.J2 = b2 * b3 * b3 * b3 / 12.0;
  s.J3 = b3 * b2 * b2 * b2 / 12.0;
  s.Jt = (b2 >= b3) ? rectangle_torsion(b2, b3) : rectangle_torsion(b3, b2);
  return s;
}

CrossSection CrossSection::circle(double d) {
  if (!(d > 0.0)) throw ContractError("circle: diameter must be positive");
  CrossSection s{};
  s.A = std::numbers::pi * d * d / 4.0;
  s.A2 = 0.9 * s.A;
  s.A3 = 0.9 * s.A;
  s.J2 = std::numbers::pi * std::pow(d, 4) / 64.0;
  s.J3 = s.J2;
  s.Jt = std::numbers::pi * std::pow(d, 4) / 32.0;
  return s;
}

void MaxwellMaterial::validate() const {
  if (E_inf < 0.0) throw ContractError("material: negative long-term modulus");
  if (!(E_inf > 0.0) && branches.empty()) {
    throw ContractError("material: needs a long-term modulus or at least one branch");
  }
  if (nu <= -1.0 || nu >= 0.5) throw ContractError("material: Poisson ratio out of range");
  for (const auto& b : branches) {
    if (b.E < 0.0) throw ContractError("material: negative branch modulus");
    if (!(b.tau > 0.0)) throw ContractError("material: branch relaxation time must be positive");
  }
}

ConstitutiveTensors elastic_tensors(const MaxwellMaterial& mat, const CrossSection& sec) {
  mat.validate();
  sec.validate();
  ConstitutiveTensors ct;
  ct.Cn_inf = Vec3(mat.E_inf * sec.A, mat.G_inf() * sec.A2, mat.G_inf() * sec.A3);
  ct.Cm_inf = Vec3(mat.G_inf() * sec.Jt, mat.E_inf * sec.J2, mat.E_inf * sec.J3);
  ct.Cn_inst = ct.Cn_inf;
  ct.Cm_inst = ct.Cm_inf;
  for (std::size_t a = 0; a < mat.num_branches(); ++a) {
    const double e = mat.branches[a].E;
    const double g = mat.G_branch(a);
    ct.Cn_v.emplace_back(e * sec.A, g * sec.A2, g * sec.A3);
    ct.Cm_v.emplace_back(g * sec.Jt, e * sec.J2, e * sec.J3);
    ct.tau.push_back(mat.branches[a].tau);
    ct.Cn_inst += ct.Cn_v.back();
    ct.Cm_inst += ct.Cm_v.back();
  }
  return ct;
}

EffectiveTensors effective_tensors(const ConstitutiveTensors& ct, double dt) {
  if (dt < 0.0) throw ContractError("effective_tensors: negative time step");
  EffectiveTensors eff{ct.Cn_inst, ct.Cm_inst};
  for (std::size_t a = 0; a < ct.tau.size(); ++a) {
    const double f = dt / (2.0 * ct.tau[a] + dt);
    eff.Cn -= f * ct.Cn_v[a];
    eff.Cm -= f * ct.Cm_v[a];
  }
  return eff;
}

BetaTerms history_beta(const ConstitutiveTensors& ct, double dt, const PointHistory& hist) {
  BetaTerms beta;
  const std::size_t m = ct.tau.size();
  beta.gamma.resize(m);
  beta.kappa.resize(m);
  beta.gamma_s.resize(m);
  beta.kappa_s.resize(m);
  for (std::size_t a = 0; a < m; ++a) {
    const double den = 2.0 * ct.tau[a] + dt;
    const double c_tot = dt / den;
    const double c_vis = (2.0 * ct.tau[a] - dt) / den;
    beta.gamma[a] = c_tot * hist.gamma_prev + c_vis * hist.gamma_v[a];
    beta.kappa[a] = c_tot * hist.kappa_prev + c_vis * hist.kappa_v[a];
    beta.gamma_s[a] = c_tot * hist.gamma_s_prev + c_vis * hist.gamma_v_s[a];
    beta.kappa_s[a] = c_tot * hist.kappa_s_prev + c_vis * hist.kappa_v_s[a];
  }
  return beta;
}

void update_viscous(const ConstitutiveTensors& ct, double dt,
                    const Vec3& gamma, const Vec3& kappa,
                    const Vec3& gamma_s, const Vec3& kappa_s,
                    const BetaTerms& beta, PointHistory& hist) {
  for (std::size_t a = 0; a < ct.tau.size(); ++a) {
    const double c_tot = dt / (2.0 * ct.tau[a] + dt);
    hist.gamma_v[a] = c_tot * gamma + beta.gamma[a];
    hist.kappa_v[a] = c_tot * kappa + beta.kappa[a];
    hist.gamma_v_s[a] = c_tot * gamma_s + beta.gamma_s[a];
    hist.kappa_v_s[a] = c_tot * kappa_s + beta.kappa_s[a];
  }
  hist.gamma_prev = gamma;
  hist.kappa_prev = kappa;
  hist.gamma_s_prev = gamma_s;
  hist.kappa_s_prev = kappa_s;
}

StressResultants internal_forces(const ConstitutiveTensors& ct,
                                 const Vec3& gamma, const Vec3& kappa,
                                 const PointHistory& hist) {
  StressResultants out;
  out.n = ct.Cn_inf.cwiseProduct(gamma);
  out.m = ct.Cm_inf.cwiseProduct(kappa);
  for (std::size_t a = 0; a < ct.tau.size(); ++a) {
    out.n += ct.Cn_v[a].cwiseProduct(gamma - hist.gamma_v[a]);
    out.m += ct.Cm_v[a].cwiseProduct(kappa - hist.kappa_v[a]);
  }
  return out;
}

double dissipation_increment(const ConstitutiveTensors& ct, double dt,
                             const PointHistory& before, const PointHistory& after) {
  if (dt <= 0.0) return 0.0;
  double d = 0.0;
  for (std::size_t a = 0; a < ct.tau.size(); ++a) {
    const Vec3 rate_g = (after.gamma_v[a] - before.gamma_v[a]) / dt;
    const Vec3 rate_k = (after.kappa_v[a] - before.kappa_v[a]) / dt;
    const Vec3 hn = ct.tau[a] * ct.Cn_v[a];
    const Vec3 hm = ct.tau[a] * ct.Cm_v[a];
    d += dt * (rate_g.dot(hn.cwiseProduct(rate_g)) + rate_k.dot(hm.cwiseProduct(rate_k)));
  }
  return d;
}

}  // namespace viscobeam::material
