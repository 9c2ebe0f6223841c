#include "viscobeam/so3.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <cmath>

namespace viscobeam::so3 {

namespace {

// Scalar coefficients of the Rodrigues formula and their derivatives with
// respect to y = |theta|^2.  Everything is an entire function of y, so the
// small-angle branches are plain power series.
//   a = sin(x)/x,  b = (1 - cos(x))/x^2,  x = sqrt(y).
struct RodriguesCoeffs {
  double a, b;        // values
  double da, db;      // d/dy
  double dda, ddb;    // d2/dy2
};

RodriguesCoeffs coeffs(double y) {
  RodriguesCoeffs c{};
  if (y < 1e-2) {  // x < 0.1
    c.a = 1.0 - y / 6.0 + y * y / 120.0 - y * y * y / 5040.0 + y * y * y * y / 362880.0;
    c.b = 0.5 - y / 24.0 + y * y / 720.0 - y * y * y / 40320.0;
    c.da = -1.0 / 6.0 + y / 60.0 - y * y / 1680.0 + y * y * y / 90720.0;
    c.db = -1.0 / 24.0 + y / 360.0 - y * y / 13440.0;
    c.dda = 1.0 / 60.0 - y / 840.0 + y * y / 30240.0;
    c.ddb = 1.0 / 360.0 - y / 6720.0 + y * y / 302400.0;
    return c;
  }
  const double x = std::sqrt(y);
  const double s = std::sin(x);
  const double co = std::cos(x);
  c.a = s / x;
  c.b = (1.0 - co) / y;
  c.da = (x * co - s) / (2.0 * x * y);
  c.db = (x * s - 2.0 * (1.0 - co)) / (2.0 * y * y);
  c.dda = (6.0 * s - 6.0 * x * co - 2.0 * y * s) / (8.0 * y * y * x);
  c.ddb = (2.0 * y * co - 10.0 * x * s + 16.0 - 16.0 * co) / (8.0 * y * y * y);
  return c;
}

}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return s;
}

Vec3 axial(const Mat3& s) {
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if (((s + s.transpose()).cwiseAbs().maxCoeff()) > 1e-10 * scale) {
    throw ContractError("axial: input matrix is not skew-symmetric");
  }
  return Vec3(0.5 * (s(2, 1) - s(1, 2)),
              0.5 * (s(0, 2) - s(2, 0)),
              0.5 * (s(1, 0) - s(0, 1)));
}

bool is_rotation(const Mat3& r, double tol) {
  const Mat3 gram = r.transpose() * r;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(r.determinant() - 1.0) <= tol;
}

Mat3 exp_map(const Vec3& theta) {
  const double y = theta.squaredNorm();
  double a, b;
  if (theta.norm() < 1e-4) {
    a = 1.0 - y / 6.0 + y * y / 120.0;
    b = 0.5 - y / 24.0 + y * y / 720.0;
  } else {
    const double x = std::sqrt(y);
    a = std::sin(x) / x;
    b = (1.0 - std::cos(x)) / y;
  }
  const Mat3 t = skew(theta);
  return Mat3::Identity() + a * t + b * (t * t);
}

Vec3 log_map(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

Mat3 orthonormalize(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 q = svd.matrixU() * svd.matrixV().transpose();
  if (q.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    q = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return q;
}

Mat3 dexp_along(const Vec3& theta, const Vec3& theta_s) {
  const double y = theta.squaredNorm();
  const double yp = 2.0 * theta.dot(theta_s);
  const RodriguesCoeffs c = coeffs(y);
  const Mat3 t = skew(theta);
  const Mat3 tp = skew(theta_s);
  return c.da * yp * t + c.a * tp + c.db * yp * (t * t) + c.b * (tp * t + t * tp);
}

ExpJet exp_jet(const Vec3& theta, const Vec3& theta_s, const Vec3& theta_ss) {
  const double y = theta.squaredNorm();
  const double yp = 2.0 * theta.dot(theta_s);
  const double ypp = 2.0 * (theta_s.squaredNorm() + theta.dot(theta_ss));
  const RodriguesCoeffs c = coeffs(y);
  const Mat3 t = skew(theta);
  const Mat3 tp = skew(theta_s);
  const Mat3 tpp = skew(theta_ss);
  const Mat3 t2 = t * t;
  const Mat3 mix = tp * t + t * tp;

  ExpJet jet;
  jet.value = Mat3::Identity() + c.a * t + c.b * t2;
  jet.d1 = c.da * yp * t + c.a * tp + c.db * yp * t2 + c.b * mix;
  jet.d2 = (c.dda * yp * yp + c.da * ypp) * t + 2.0 * c.da * yp * tp + c.a * tpp
         + (c.ddb * yp * yp + c.db * ypp) * t2 + 2.0 * c.db * yp * mix
         + c.b * (tpp * t + 2.0 * tp * tp + t * tpp);
  return jet;
}

Mat3 update_rotation(const Mat3& r, const Vec3& dtheta) {
  Mat3 out = r * exp_map(dtheta);
  const Mat3 gram = out.transpose() * out;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-12) {
    out = orthonormalize(out);
  }
  return out;
}

Mat3 update_curvature(const Mat3& curv_old, const Vec3& dtheta, const Vec3& dtheta_s) {
  const Mat3 e = exp_map(dtheta);
  const Mat3 de = dexp_along(dtheta, dtheta_s);
  const Mat3 k = e.transpose() * curv_old * e + e.transpose() * de;
  return 0.5 * (k - k.transpose());
}

Mat3 update_curvature_s(const Mat3& curv_old, const Mat3& curv_old_s,
                        const Vec3& dtheta, const Vec3& dtheta_s, const Vec3& dtheta_ss) {
  const ExpJet j = exp_jet(dtheta, dtheta_s, dtheta_ss);
  const Mat3 k = j.d1.transpose() * curv_old * j.value
               + j.value.transpose() * curv_old_s * j.value
               + j.value.transpose() * curv_old * j.d1
               + j.d1.transpose() * j.d1
               + j.value.transpose() * j.d2;
  return 0.5 * (k - k.transpose());
}

}  // namespace viscobeam::so3
