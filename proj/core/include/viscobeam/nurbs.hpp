#pragma once

#include <viscobeam/types.hpp>

#include <utility>
#include <vector>

namespace viscobeam::nurbs {

/// Clamped (open) knot vector: nondecreasing, first and last values
/// repeated degree+1 times, interior multiplicities at most the degree.
class KnotVector {
 public:
  explicit KnotVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }
  const std::vector<double>& values() const { return values_; }

  /// Validates the clamped structure for the given degree.
  void validate(int degree) const;

  /// Index i such that values[i] <= u < values[i+1] (last span at u = back).
  int find_span(int degree, double u) const;

 private:
  std::vector<double> values_;
};

/// Basis function values and parametric derivatives at one site: row r of
/// `ders` holds d^r/du^r of the degree-p functions with support there
/// (columns 0..p map to control indices span-p..span).
struct BasisTable {
  int span = 0;
  MatX ders;  // (k+1) x (p+1)
};

/// NURBS basis R_{j,p} and derivatives d^r R/du^r for r = 0..k (k <= 2).
/// Unit weights reduce to the plain B-spline basis.
BasisTable basis_eval(const KnotVector& knots, const std::vector<double>& weights,
                      int degree, double u, int max_deriv);

/// Greville abscissae (knot averages), one per control point.
std::vector<double> greville(const KnotVector& knots, int degree);

class NurbsCurve {
 public:
  NurbsCurve(int degree, KnotVector knots, std::vector<Vec3> control_points,
             std::vector<double> weights);

  int degree() const { return degree_; }
  const KnotVector& knots() const { return knots_; }
  std::size_t num_controls() const { return control_points_.size(); }
  const std::vector<Vec3>& control_points() const { return control_points_; }
  std::vector<Vec3>& control_points() { return control_points_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Point and parametric derivatives d^r c/du^r, r = 0..k (k <= 2).
  std::array<Vec3, 3> eval(double u, int max_deriv) const;

  Vec3 point(double u) const { return eval(u, 0)[0]; }

 private:
  int degree_;
  KnotVector knots_;
  std::vector<Vec3> control_points_;
  std::vector<double> weights_;
};

/// Arc-length Jacobian J = |dc/du| and its parametric derivative dJ/du.
/// Throws GeometryError when the tangent vanishes.
struct Jacobian {
  double j;
  double j_u;
};
Jacobian jacobian(const NurbsCurve& curve, double u);

/// Degree elevation to `target_degree` followed by insertion of `n_insert`
/// uniformly placed knots (multiplicity 1).  Geometry-preserving: the
/// refined curve is the exact representation of the input in the enlarged
/// space, computed by interpolation at the Greville abscissae of the target
/// space in homogeneous coordinates.
NurbsCurve k_refine(const NurbsCurve& curve, int target_degree, int n_insert);

/// Exact circular arc of the given radius and opening angle, centered at
/// the origin in the x1-x2 plane, starting at (radius, 0, 0) and turning
/// counterclockwise.  Angles beyond pi/2 are built from multiple rational
/// quadratic segments joined C0.
NurbsCurve make_arc(double radius, double angle);

/// Straight segment represented exactly at the requested degree and control
/// count, with control points at the Greville abscissae so that the
/// parameterization is affine in u.
NurbsCurve make_line(const Vec3& from, const Vec3& to, int degree, int n_controls);

/// Least-squares fit with clamped endpoint interpolation.
/// Samples are (parameter, point) pairs ordered by parameter; parameters are
/// rescaled to [0,1].  Knots follow the standard parameter-averaging rule.
struct FitResult {
  NurbsCurve curve;
  double max_residual;
};
FitResult fit_curve(const std::vector<std::pair<double, Vec3>>& samples, int degree,
                    int n_controls);

/// Chord-length parameter assignment for raw point sequences.
std::vector<std::pair<double, Vec3>> chord_length_samples(const std::vector<Vec3>& points);

}  // namespace viscobeam::nurbs
