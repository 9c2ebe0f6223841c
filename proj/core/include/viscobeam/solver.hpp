#pragma once

#include <viscobeam/scene.hpp>
#include <viscobeam/types.hpp>

#include <functional>
#include <vector>

namespace viscobeam::solver {

struct SolverSettings {
  double dt = 1e-3;           // [s]
  double T = 1.0;             // [s]; T = 0 runs only the instantaneous solve
  double newton_tol = 1e-10;  // residual infinity-norm threshold
  int max_iter = 50;
  bool substep_on_failure = true;

  void validate() const;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(int step, double time, std::vector<double> residuals)
      : std::runtime_error("Newton iteration did not converge at step " + std::to_string(step) +
                           " (t = " + std::to_string(time) + " s)"),
        step(step),
        time(time),
        residual_history(std::move(residuals)) {}
  int step;
  double time;
  std::vector<double> residual_history;
};

/// Freezes the per-step data: effective tensors and history terms for the
/// given step span.  dt = 0 yields the instantaneous elastic problem.
void begin_step(scene::Scene& scene, double dt);

struct IterationResult {
  int iterations = 0;  // residual evaluations (solves + final check)
  std::vector<double> residual_norms;
};

/// Newton iteration at time t with the step data frozen by begin_step.
/// Throws NonConvergenceError (step index filled by the caller) on failure.
IterationResult newton_iterate(scene::Scene& scene, double t, const SolverSettings& settings);

/// Advances the viscous history after a converged step and accumulates the
/// dissipated energy.  No-op for elastic materials apart from moving the
/// previous-step totals.
void advance_history(scene::Scene& scene, double dt);

struct StepRecord {
  int step = 0;
  double t = 0.0;
  int iterations = 0;
  double dissipation = 0.0;  // cumulative [J]
};

struct TimeHistory {
  std::vector<StepRecord> steps;
};

using StepCallback = std::function<void(const StepRecord&)>;

/// Time loop: the first solve is the instantaneous elastic response at
/// t = 0, followed by trapezoidal steps of size dt up to T.  A step that
/// fails to converge is retried once as two half steps.
TimeHistory run(scene::Scene& scene, const SolverSettings& settings,
                const StepCallback& on_step = {});

}  // namespace viscobeam::solver
