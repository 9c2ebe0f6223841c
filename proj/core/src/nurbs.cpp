#include "viscobeam/nurbs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace viscobeam::nurbs {

KnotVector::KnotVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 4) throw ContractError("knot vector: too few knots");
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] < values_[i - 1]) throw ContractError("knot vector: not nondecreasing");
  }
  if (!(values_.back() > values_.front())) {
    throw ContractError("knot vector: zero parametric range");
  }
}

void KnotVector::validate(int degree) const {
  const std::size_t p = static_cast<std::size_t>(degree);
  if (values_.size() < 2 * (p + 1)) throw ContractError("knot vector: too few knots for degree");
  for (std::size_t i = 0; i <= p; ++i) {
    if (values_[i] != values_.front() || values_[values_.size() - 1 - i] != values_.back()) {
      throw ContractError("knot vector: not clamped for degree");
    }
  }
  // interior multiplicities at most p
  std::size_t run = 1;
  for (std::size_t i = p + 2; i + p + 1 < values_.size(); ++i) {
    run = (values_[i] == values_[i - 1]) ? run + 1 : 1;
    if (run > p) throw ContractError("knot vector: interior multiplicity exceeds degree");
  }
}

int KnotVector::find_span(int degree, double u) const {
  const int n = static_cast<int>(values_.size()) - degree - 2;  // last control index
  if (u < values_.front() || u > values_.back()) {
    throw ContractError("parameter outside knot range");
  }
  if (u >= values_[static_cast<std::size_t>(n + 1)]) return n;
  int low = degree;
  int high = n + 1;
  int mid = (low + high) / 2;
  while (u < values_[mid] || u >= values_[mid + 1]) {
    if (u < values_[mid]) high = mid; else low = mid;
    mid = (low + high) / 2;
  }
  return mid;
}

namespace {

// B-spline basis functions and parametric derivatives on one span
// (rows: derivative order, cols: local function index 0..p).
MatX bspline_ders(const KnotVector& knots, int degree, int span, double u, int n_ders) {
  const int p = degree;
  const auto& U = knots.values();
  MatX ndu(p + 1, p + 1);
  std::vector<double> left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - U[span + 1 - j];
    right[j] = U[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }

  MatX ders = MatX::Zero(n_ders + 1, p + 1);
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

  MatX a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= n_ders; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double f = p;
  for (int k = 1; k <= n_ders; ++k) {
    for (int j = 0; j <= p; ++j) ders(k, j) *= f;
    f *= (p - k);
  }
  return ders;
}

}  // namespace

BasisTable basis_eval(const KnotVector& knots, const std::vector<double>& weights,
                      int degree, double u, int max_deriv) {
  if (max_deriv < 0 || max_deriv > 2) throw ContractError("basis_eval: derivative order must be 0..2");
  const std::size_t n = knots.size() - degree - 1;
  if (weights.size() != n) throw ContractError("basis_eval: weight count mismatch");
  for (double w : weights) {
    if (!(w > 0.0)) throw ContractError("basis_eval: weights must be positive");
  }

  BasisTable table;
  table.span = knots.find_span(degree, u);
  const MatX nd = bspline_ders(knots, degree, table.span, u, max_deriv);

  // Quotient-rule correction: R_j = w_j N_j / W.
  VecX w_local(degree + 1);
  for (int j = 0; j <= degree; ++j) w_local[j] = weights[table.span - degree + j];
  VecX wders = VecX::Zero(max_deriv + 1);
  for (int r = 0; r <= max_deriv; ++r) {
    for (int j = 0; j <= degree; ++j) wders[r] += nd(r, j) * w_local[j];
  }

  table.ders = MatX::Zero(max_deriv + 1, degree + 1);
  for (int j = 0; j <= degree; ++j) {
    const double a0 = w_local[j] * nd(0, j);
    table.ders(0, j) = a0 / wders[0];
    if (max_deriv >= 1) {
      const double a1 = w_local[j] * nd(1, j);
      table.ders(1, j) = (a1 - table.ders(0, j) * wders[1]) / wders[0];
    }
    if (max_deriv >= 2) {
      const double a2 = w_local[j] * nd(2, j);
      table.ders(2, j) =
          (a2 - 2.0 * table.ders(1, j) * wders[1] - table.ders(0, j) * wders[2]) / wders[0];
    }
  }
  return table;
}

std::vector<double> greville(const KnotVector& knots, int degree) {
  const std::size_t n = knots.size() - degree - 1;
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int r = 1; r <= degree; ++r) acc += knots[j + r];
    out[j] = acc / degree;
  }
  return out;
}

NurbsCurve::NurbsCurve(int degree, KnotVector knots, std::vector<Vec3> control_points,
                       std::vector<double> weights)
    : degree_(degree),
      knots_(std::move(knots)),
      control_points_(std::move(control_points)),
      weights_(std::move(weights)) {
  if (degree_ < 1) throw ContractError("curve: degree must be >= 1");
  knots_.validate(degree_);
  const std::size_t n = knots_.size() - degree_ - 1;
  if (control_points_.size() != n) throw ContractError("curve: control point count mismatch");
  if (weights_.size() != n) throw ContractError("curve: weight count mismatch");
  for (double w : weights_) {
    if (!(w > 0.0)) throw ContractError("curve: weights must be positive");
  }
}

std::array<Vec3, 3> NurbsCurve::eval(double u, int max_deriv) const {
  const BasisTable t = basis_eval(knots_, weights_, degree_, u, max_deriv);
  std::array<Vec3, 3> out{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  for (int r = 0; r <= max_deriv; ++r) {
    for (int j = 0; j <= degree_; ++j) {
      out[r] += t.ders(r, j) * control_points_[t.span - degree_ + j];
    }
  }
  return out;
}

Jacobian jacobian(const NurbsCurve& curve, double u) {
  const auto d = curve.eval(u, 2);
  const double j = d[1].norm();
  if (j <= 1e-12) throw GeometryError("jacobian: vanishing tangent");
  return Jacobian{j, d[1].dot(d[2]) / j};
}

NurbsCurve k_refine(const NurbsCurve& curve, int target_degree, int n_insert) {
  if (target_degree < curve.degree()) {
    throw ContractError("k_refine: target degree below curve degree");
  }
  if (n_insert < 0) throw ContractError("k_refine: negative insertion count");
  const int t = target_degree - curve.degree();

  // Unique source knots with multiplicities.
  std::vector<std::pair<double, int>> uniq;
  for (double v : curve.knots().values()) {
    if (!uniq.empty() && v == uniq.back().first) {
      ++uniq.back().second;
    } else {
      uniq.emplace_back(v, 1);
    }
  }
  // Interior multiplicities grow by the elevation amount (continuity kept).
  for (auto& [v, m] : uniq) m += t;
  uniq.front().second = target_degree + 1;
  uniq.back().second = target_degree + 1;

  const double lo = curve.knots().front();
  const double hi = curve.knots().back();
  for (int i = 1; i <= n_insert; ++i) {
    const double v = lo + (hi - lo) * static_cast<double>(i) / (n_insert + 1);
    auto it = std::lower_bound(uniq.begin(), uniq.end(), v,
                               [](const auto& a, double b) { return a.first < b; });
    if (it != uniq.end() && std::abs(it->first - v) < 1e-12 * (hi - lo)) {
      ++it->second;
    } else {
      uniq.insert(it, {v, 1});
    }
  }

  std::vector<double> target_values;
  for (const auto& [v, m] : uniq) target_values.insert(target_values.end(), m, v);
  KnotVector target_knots(target_values);
  target_knots.validate(target_degree);

  // Interpolate the source curve in homogeneous coordinates at the Greville
  // points of the target space; the target space contains the source space,
  // so the interpolant is the same curve.
  const std::vector<double> gre = greville(target_knots, target_degree);
  const int m = static_cast<int>(gre.size());
  const std::vector<double> unit_w(m, 1.0);
  MatX b = MatX::Zero(m, m);
  MatX rhs(m, 4);
  const std::vector<double> src_unit_w(curve.num_controls(), 1.0);
  for (int i = 0; i < m; ++i) {
    const BasisTable bt = basis_eval(target_knots, unit_w, target_degree, gre[i], 0);
    for (int j = 0; j <= target_degree; ++j) {
      b(i, bt.span - target_degree + j) = bt.ders(0, j);
    }
    const BasisTable st = basis_eval(curve.knots(), src_unit_w, curve.degree(), gre[i], 0);
    Eigen::Vector4d h = Eigen::Vector4d::Zero();
    for (int j = 0; j <= curve.degree(); ++j) {
      const int cj = st.span - curve.degree() + j;
      const double wn = curve.weights()[cj] * st.ders(0, j);
      h.head<3>() += wn * curve.control_points()[cj];
      h[3] += wn;
    }
    rhs.row(i) = h.transpose();
  }

  const MatX sol = Eigen::PartialPivLU<MatX>(b).solve(rhs);
  std::vector<Vec3> controls(m);
  std::vector<double> weights(m);
  for (int i = 0; i < m; ++i) {
    weights[i] = sol(i, 3);
    if (!(weights[i] > 0.0)) throw GeometryError("k_refine: refinement produced nonpositive weight");
    controls[i] = sol.row(i).head<3>().transpose() / weights[i];
  }
  return NurbsCurve(target_degree, std::move(target_knots), std::move(controls), std::move(weights));
}

NurbsCurve make_arc(double radius, double angle) {
  if (!(radius > 0.0)) throw ContractError("make_arc: radius must be positive");
  if (!(angle > 0.0) || angle > 2.0 * std::numbers::pi + 1e-12) {
    throw ContractError("make_arc: angle must be in (0, 2*pi]");
  }
  const int segments = std::max(1, static_cast<int>(std::ceil(angle / (0.5 * std::numbers::pi) - 1e-12)));
  const double seg_angle = angle / segments;
  const double w_mid = std::cos(0.5 * seg_angle);

  std::vector<Vec3> controls;
  std::vector<double> weights;
  std::vector<double> knot_values(3, 0.0);
  controls.emplace_back(radius, 0.0, 0.0);
  weights.push_back(1.0);
  for (int k = 0; k < segments; ++k) {
    const double a0 = k * seg_angle;
    const double a1 = (k + 1) * seg_angle;
    const double am = 0.5 * (a0 + a1);
    controls.emplace_back(radius / w_mid * std::cos(am), radius / w_mid * std::sin(am), 0.0);
    weights.push_back(w_mid);
    controls.emplace_back(radius * std::cos(a1), radius * std::sin(a1), 0.0);
    weights.push_back(1.0);
    const double breakpoint = static_cast<double>(k + 1) / segments;
    if (k + 1 < segments) {
      knot_values.push_back(breakpoint);
      knot_values.push_back(breakpoint);
    }
  }
  knot_values.insert(knot_values.end(), 3, 1.0);
  return NurbsCurve(2, KnotVector(std::move(knot_values)), std::move(controls), std::move(weights));
}

NurbsCurve make_line(const Vec3& from, const Vec3& to, int degree, int n_controls) {
  if (n_controls < degree + 1) throw ContractError("make_line: need at least degree+1 controls");
  std::vector<double> knot_values;
  knot_values.insert(knot_values.end(), degree + 1, 0.0);
  const int interior = n_controls - degree - 1;
  for (int i = 1; i <= interior; ++i) {
    knot_values.push_back(static_cast<double>(i) / (interior + 1));
  }
  knot_values.insert(knot_values.end(), degree + 1, 1.0);
  KnotVector knots(std::move(knot_values));
  const std::vector<double> gre = greville(knots, degree);
  std::vector<Vec3> controls(gre.size());
  for (std::size_t j = 0; j < gre.size(); ++j) controls[j] = from + gre[j] * (to - from);
  return NurbsCurve(degree, std::move(knots), std::move(controls),
                    std::vector<double>(gre.size(), 1.0));
}

FitResult fit_curve(const std::vector<std::pair<double, Vec3>>& samples, int degree,
                    int n_controls) {
  const int m = static_cast<int>(samples.size());
  if (m < n_controls) throw ContractError("fit_curve: need at least as many samples as controls");
  if (n_controls < degree + 1) throw ContractError("fit_curve: need at least degree+1 controls");
  for (int i = 1; i < m; ++i) {
    if (!(samples[i].first > samples[i - 1].first)) {
      throw ContractError("fit_curve: samples must be strictly ordered by parameter");
    }
  }

  const double t0 = samples.front().first;
  const double t1 = samples.back().first;
  std::vector<double> tb(m);
  for (int i = 0; i < m; ++i) tb[i] = (samples[i].first - t0) / (t1 - t0);

  // Knot placement by parameter averaging keeps every span populated.
  std::vector<double> knot_values;
  knot_values.insert(knot_values.end(), degree + 1, 0.0);
  const int interior = n_controls - degree - 1;
  const double d = static_cast<double>(m) / (n_controls - degree);
  for (int j = 1; j <= interior; ++j) {
    const int i = static_cast<int>(std::floor(j * d));
    const double alpha = j * d - i;
    knot_values.push_back((1.0 - alpha) * tb[i - 1] + alpha * tb[i]);
  }
  knot_values.insert(knot_values.end(), degree + 1, 1.0);
  KnotVector knots(std::move(knot_values));

  const std::vector<double> unit_w(n_controls, 1.0);
  const int free = n_controls - 2;
  MatX a = MatX::Zero(m - 2, free);
  MatX rhs = MatX::Zero(m - 2, 3);
  for (int i = 1; i + 1 < m; ++i) {
    const BasisTable bt = basis_eval(knots, unit_w, degree, tb[i], 0);
    Vec3 r = samples[i].second;
    for (int j = 0; j <= degree; ++j) {
      const int cj = bt.span - degree + j;
      if (cj == 0) {
        r -= bt.ders(0, j) * samples.front().second;
      } else if (cj == n_controls - 1) {
        r -= bt.ders(0, j) * samples.back().second;
      } else {
        a(i - 1, cj - 1) = bt.ders(0, j);
      }
    }
    rhs.row(i - 1) = r.transpose();
  }

  Eigen::ColPivHouseholderQR<MatX> qr(a);
  if (qr.rank() < free) throw GeometryError("fit_curve: rank-deficient fit system");
  const MatX sol = qr.solve(rhs);

  std::vector<Vec3> controls(n_controls);
  controls.front() = samples.front().second;
  controls.back() = samples.back().second;
  for (int j = 0; j < free; ++j) controls[j + 1] = sol.row(j).transpose();

  NurbsCurve curve(degree, std::move(knots), std::move(controls),
                   std::vector<double>(n_controls, 1.0));
  double max_res = 0.0;
  for (int i = 0; i < m; ++i) {
    max_res = std::max(max_res, (curve.point(tb[i]) - samples[i].second).norm());
  }
  return FitResult{std::move(curve), max_res};
}

std::vector<std::pair<double, Vec3>> chord_length_samples(const std::vector<Vec3>& points) {
  std::vector<std::pair<double, Vec3>> out;
  out.reserve(points.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0) acc += (points[i] - points[i - 1]).norm();
    out.emplace_back(acc, points[i]);
  }
  return out;
}

}  // namespace viscobeam::nurbs
