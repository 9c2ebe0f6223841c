#pragma once

#include <viscobeam/assembly.hpp>
#include <viscobeam/patch.hpp>
#include <viscobeam/types.hpp>

#include <memory>
#include <vector>

namespace viscobeam::scene {

/// Piecewise-linear scalar function of time; constant extrapolation outside
/// the breakpoint range, exact values at breakpoints.
class TimeFunction {
 public:
  TimeFunction() : points_{{0.0, 0.0}} {}
  explicit TimeFunction(std::vector<std::pair<double, double>> points);

  double operator()(double t) const;

  static TimeFunction constant(double v) { return TimeFunction({{0.0, v}}); }
  /// 0 at t=0, linear to v at t_ramp, constant afterwards.
  static TimeFunction ramp(double v, double t_ramp);

  const std::vector<std::pair<double, double>>& points() const { return points_; }

 private:
  std::vector<std::pair<double, double>> points_;
};

/// Fixed spatial direction scaled by a time function.
struct LoadTerm {
  Vec3 amplitude = Vec3::Zero();
  TimeFunction history = TimeFunction::constant(1.0);
  Vec3 eval(double t) const { return amplitude * history(t); }
};

Vec3 eval_terms(const std::vector<LoadTerm>& terms, double t);

/// Boundary data for one patch end: one kind per translational/rotational
/// triple.  Dirichlet triples prescribe displacement/rotation-vector
/// histories (empty = clamped); Neumann triples carry applied end loads.
struct BoundarySpec {
  bool dirichlet_translation = false;
  bool dirichlet_rotation = false;
  std::vector<LoadTerm> forces;        // Neumann [N]
  std::vector<LoadTerm> couples;       // Neumann [N*m]
  std::vector<LoadTerm> translations;  // Dirichlet [m]
  std::vector<LoadTerm> rotations;     // Dirichlet [rad]

  static BoundarySpec clamped() {
    BoundarySpec b;
    b.dirichlet_translation = b.dirichlet_rotation = true;
    return b;
  }
  static BoundarySpec free_end() { return {}; }
};

struct ScenePatch {
  Patch patch;
  BoundarySpec start;
  BoundarySpec end;
  std::vector<LoadTerm> distributed_forces;   // [N/m], spatial frame
  std::vector<LoadTerm> distributed_couples;  // [N*m/m]

  explicit ScenePatch(Patch p) : patch(std::move(p)) {}
};

/// Rigid joint: all member ends share one spatial point; relative rotations
/// between member frames stay locked at their reference values.
struct Joint {
  struct Member {
    int patch = 0;
    bool at_end = true;  // true: u = 1 end, false: u = 0 end
  };
  std::vector<Member> members;
  std::vector<LoadTerm> forces;   // concentrated at the joint [N]
  std::vector<LoadTerm> couples;  // [N*m]
};

class Scene {
 public:
  std::vector<ScenePatch>& patches() { return patches_; }
  const std::vector<ScenePatch>& patches() const { return patches_; }
  std::vector<Joint>& joints() { return joints_; }
  const std::vector<Joint>& joints() const { return joints_; }

  int add_patch(ScenePatch p);
  int add_joint(Joint j);

  int num_dofs() const;
  int patch_offset(int i) const;

  /// Checks member-end coincidence (1e-8 m) and caches the reference
  /// relative rotations used by the joint continuity rows.  Call after the
  /// scene is fully composed; add_* invalidate the cache.
  void finalize();
  bool finalized() const { return finalized_; }

  /// Assembles the bordered-banded global system at time t.
  assembly::GlobalSystem assemble(double t) const;

  /// Distributes a solved global increment to the patches.
  void apply_increment(const VecX& delta);

  /// Restores/persists the mutable configuration (used for sub-stepping).
  struct Snapshot {
    std::vector<std::vector<Vec3>> controls;
    std::vector<std::vector<kinematics::PointState>> states;
    std::vector<double> dissipated;
  };
  Snapshot snapshot() const;
  void restore(const Snapshot& snap);

  double total_dissipated() const;

 private:
  std::vector<ScenePatch> patches_;
  std::vector<Joint> joints_;
  std::vector<std::vector<Mat3>> joint_rel_rot_;  // per joint, per member e>=1
  bool finalized_ = false;

  void assemble_joint(std::size_t j, double t, std::vector<Eigen::Triplet<double>>& trip,
                      VecX& rhs) const;
};

/// Discretization parameters shared by the scene generators.
struct NetDiscretization {
  int degree = 8;
  int n_controls = 35;
};

/// Planar net of sinusoidal patches (coordinates in meters; the cell
/// pattern lives on a centimeter grid).  k = 1..n1 rows in the x2
/// direction, j = 1..n2 half-period patches per row.  Clamped along the
/// x1 = 0 edge; twisting couples about x1 at the free tips of the opposite
/// edge.
Scene build_planar_net(int n1, int n2, const material::CrossSection& section,
                       const material::MaxwellMaterial& mat,
                       const NetDiscretization& disc = {8, 35},
                       const LoadTerm& tip_couple = LoadTerm{});

/// Tubular net: n_pairs counter-handed helical wire pairs on a tube of
/// radius R, wire-center modulation r, n_w quarter-turn patches per wire.
/// Clamped at both end rings; radial forces at the mid-height joints.
Scene build_tubular_net(int n_w, double R, double r, const material::CrossSection& section,
                        const material::MaxwellMaterial& mat,
                        const NetDiscretization& disc = {8, 20},
                        const TimeFunction& radial_force = TimeFunction::constant(0.0),
                        int n_pairs = 6);

}  // namespace viscobeam::scene
