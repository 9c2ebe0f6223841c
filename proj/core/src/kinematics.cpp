#include "viscobeam/kinematics.hpp"

#include "viscobeam/so3.hpp"

#include <algorithm>
#include <cmath>

namespace viscobeam::kinematics {

namespace {

Vec3 pick_director(const Vec3& tangent) {
  int k = 0;
  double best = std::abs(tangent[0]);
  for (int i = 1; i < 3; ++i) {
    if (std::abs(tangent[i]) < best) {
      best = std::abs(tangent[i]);
      k = i;
    }
  }
  return Vec3::Unit(k);
}

Vec3 unit_tangent(const nurbs::NurbsCurve& curve, double u) {
  const Vec3 cu = curve.eval(u, 1)[1];
  const double n = cu.norm();
  if (n <= 1e-12) throw GeometryError("reference frame: vanishing tangent");
  return cu / n;
}

// Smallest rotation taking tangent a to tangent b.
Mat3 transport(const Vec3& a, const Vec3& b) {
  const Vec3 axis = a.cross(b);
  const double s = axis.norm();
  const double c = a.dot(b);
  if (s < 1e-15) {
    if (c < 0.0) throw GeometryError("reference frame: tangent reversal between march nodes");
    return Mat3::Identity();
  }
  return so3::exp_map(std::atan2(s, c) * axis / s);
}

struct Frame {
  Vec3 d1, d2, d3;
  Mat3 matrix() const {
    Mat3 r;
    r.col(0) = d1;
    r.col(1) = d2;
    r.col(2) = d3;
    return r;
  }
};

Frame step_frame(const Frame& prev, const Vec3& t_new) {
  Frame f;
  f.d1 = t_new;
  f.d2 = transport(prev.d1, t_new) * prev.d2;
  f.d2 -= f.d2.dot(f.d1) * f.d1;
  f.d2.normalize();
  f.d3 = f.d1.cross(f.d2);
  return f;
}

// Material curvature of the smallest-rotation frame: the frame has no twist,
// so its angular velocity along s is d1 x d1,s.
Vec3 frame_curvature(const nurbs::NurbsCurve& curve, const Mat3& r0, double u) {
  const auto d = curve.eval(u, 2);
  const double j = d[1].norm();
  const Vec3 t = d[1] / j;
  const Vec3 t_u = (d[2] - t.dot(d[2]) * t) / j;
  const Vec3 omega = t.cross(t_u / j);
  return r0.transpose() * omega;
}

}  // namespace

std::vector<ReferencePoint> build_reference(const nurbs::NurbsCurve& curve,
                                            const std::vector<double>& sites,
                                            const FrameOptions& options) {
  if (sites.empty()) return {};

  const double lo = curve.knots().front();
  const double hi = curve.knots().back();
  const int n_fine = std::max<int>(1000, 40 * static_cast<int>(sites.size()));
  std::vector<double> grid;
  grid.reserve(n_fine + 1 + sites.size());
  for (int i = 0; i <= n_fine; ++i) grid.push_back(lo + (hi - lo) * i / n_fine);
  grid.insert(grid.end(), sites.begin(), sites.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [&](double a, double b) { return std::abs(a - b) < 1e-14 * (hi - lo); }),
             grid.end());

  Frame frame;
  frame.d1 = unit_tangent(curve, grid.front());
  Vec3 seed = options.initial_director.value_or(pick_director(frame.d1));
  seed -= seed.dot(frame.d1) * frame.d1;
  if (seed.norm() < 1e-8) {
    throw GeometryError("reference frame: initial director parallel to the start tangent");
  }
  frame.d2 = seed.normalized();
  frame.d3 = frame.d1.cross(frame.d2);

  // March once, catching the frames at the requested sites.
  std::vector<ReferencePoint> out(sites.size());
  std::vector<bool> done(sites.size(), false);
  auto record = [&](double u, const Frame& f) {
    for (std::size_t k = 0; k < sites.size(); ++k) {
      if (!done[k] && std::abs(sites[k] - u) < 1e-13 * (hi - lo) + 1e-300) {
        out[k].R0 = f.matrix();
        done[k] = true;
      }
    }
  };
  record(grid.front(), frame);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    frame = step_frame(frame, unit_tangent(curve, grid[i]));
    record(grid[i], frame);
  }
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if (!done[k]) throw GeometryError("reference frame: site missing from march grid");
  }

  const double h = 1e-5 * (hi - lo);
  for (std::size_t k = 0; k < sites.size(); ++k) {
    ReferencePoint& rp = out[k];
    const double u = sites[k];
    const auto d = curve.eval(u, 2);
    const nurbs::Jacobian jac = nurbs::jacobian(curve, u);
    rp.c_s = d[1] / jac.j;
    rp.c_ss = d[2] / (jac.j * jac.j) - d[1] * jac.j_u / (jac.j * jac.j * jac.j);
    rp.curv0 = frame_curvature(curve, rp.R0, u);

    // dK0/du by second-order differences of the zero-twist curvature, with
    // neighbor frames obtained by one smallest-rotation step from R0.
    auto curv_at = [&](double v) {
      const Mat3 r = transport(rp.c_s, unit_tangent(curve, v)) * rp.R0;
      return frame_curvature(curve, r, v);
    };
    Vec3 dcurv_du;
    if (u - h < lo) {
      dcurv_du = (-3.0 * rp.curv0 + 4.0 * curv_at(u + h) - curv_at(u + 2.0 * h)) / (2.0 * h);
    } else if (u + h > hi) {
      dcurv_du = (3.0 * rp.curv0 - 4.0 * curv_at(u - h) + curv_at(u - 2.0 * h)) / (2.0 * h);
    } else {
      dcurv_du = (curv_at(u + h) - curv_at(u - h)) / (2.0 * h);
    }
    rp.curv0_s = dcurv_du / jac.j;

    rp.gamma0 = rp.R0.transpose() * rp.c_s - Vec3::UnitX();
    rp.gamma0_hat_s = so3::skew(rp.curv0).transpose() * (rp.R0.transpose() * rp.c_s)
                    + rp.R0.transpose() * rp.c_ss;
  }
  return out;
}

Strains strains(const Mat3& r, const Vec3& c_s, const Vec3& curv, const ReferencePoint& ref) {
  Strains st;
  st.gamma = r.transpose() * c_s - (ref.gamma0 + Vec3::UnitX());
  st.kappa = curv - ref.curv0;
  return st;
}

Strains strain_derivatives(const Mat3& r, const Vec3& curv, const Vec3& curv_s,
                           const Vec3& c_s, const Vec3& c_ss, const ReferencePoint& ref) {
  Strains st;
  st.gamma = so3::skew(curv).transpose() * (r.transpose() * c_s) + r.transpose() * c_ss
           - ref.gamma0_hat_s;
  st.kappa = curv_s - ref.curv0_s;
  return st;
}

void refresh_strains(PointState& st, const ReferencePoint& ref) {
  const Strains s = strains(st.R, st.c_s, st.curv, ref);
  st.gamma = s.gamma;
  st.kappa = s.kappa;
  const Strains ds = strain_derivatives(st.R, st.curv, st.curv_s, st.c_s, st.c_ss, ref);
  st.gamma_s = ds.gamma;
  st.kappa_s = ds.kappa;
}

}  // namespace viscobeam::kinematics
