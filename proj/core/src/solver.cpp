#include "viscobeam/solver.hpp"

#include <cmath>

namespace viscobeam::solver {

void SolverSettings::validate() const {
  if (!(dt > 0.0)) throw ContractError("solver settings: dt must be positive");
  if (T < 0.0) throw ContractError("solver settings: negative simulation time");
  if (!(newton_tol > 0.0)) throw ContractError("solver settings: tolerance must be positive");
  if (max_iter < 1) throw ContractError("solver settings: max_iter must be >= 1");
}

void begin_step(scene::Scene& scene, double dt) {
  for (auto& sp : scene.patches()) {
    Patch& p = sp.patch;
    p.step_dt = dt;
    p.step_eff = material::effective_tensors(p.tensors(), dt);
    p.step_beta.resize(p.states().size());
    for (std::size_t i = 0; i < p.states().size(); ++i) {
      p.step_beta[i] = material::history_beta(p.tensors(), dt, p.states()[i].hist);
    }
  }
}

IterationResult newton_iterate(scene::Scene& scene, double t, const SolverSettings& settings) {
  IterationResult log;
  for (int k = 0; k <= settings.max_iter; ++k) {
    assembly::GlobalSystem sys = scene.assemble(t);
    const double norm = sys.rhs.cwiseAbs().maxCoeff();
    log.residual_norms.push_back(norm);
    log.iterations = static_cast<int>(log.residual_norms.size());
    if (!std::isfinite(norm)) {
      throw NonConvergenceError(-1, t, log.residual_norms);
    }
    if (norm <= settings.newton_tol) return log;
    if (k == settings.max_iter) break;
    scene.apply_increment(assembly::solve_linear(sys));
  }
  throw NonConvergenceError(-1, t, log.residual_norms);
}

namespace {

// Arc-length quadrature weight of collocation point i (trapezoid widths).
double site_weight(const Patch& p, std::size_t i) {
  const auto& sites = p.sites();
  const double u_prev = (i == 0) ? sites[0].u : sites[i - 1].u;
  const double u_next = (i + 1 == sites.size()) ? sites[i].u : sites[i + 1].u;
  return 0.5 * (u_next - u_prev) * sites[i].jac;
}

}  // namespace

void advance_history(scene::Scene& scene, double dt) {
  for (auto& sp : scene.patches()) {
    Patch& p = sp.patch;
    for (std::size_t i = 0; i < p.states().size(); ++i) {
      kinematics::PointState& st = p.states()[i];
      const material::PointHistory before = st.hist;
      material::update_viscous(p.tensors(), dt, st.gamma, st.kappa, st.gamma_s, st.kappa_s,
                               p.step_beta[i], st.hist);
      p.dissipated +=
          site_weight(p, i) * material::dissipation_increment(p.tensors(), dt, before, st.hist);
    }
  }
}

TimeHistory run(scene::Scene& scene, const SolverSettings& settings, const StepCallback& on_step) {
  settings.validate();
  if (!scene.finalized()) scene.finalize();

  TimeHistory history;
  auto record = [&](int step, double t, int iterations) {
    StepRecord rec{step, t, iterations, scene.total_dissipated()};
    history.steps.push_back(rec);
    if (on_step) on_step(rec);
  };

  auto solve_at = [&](int step, double t, double dt_eff) {
    begin_step(scene, dt_eff);
    try {
      const IterationResult it = newton_iterate(scene, t, settings);
      advance_history(scene, dt_eff);
      return it.iterations;
    } catch (NonConvergenceError& e) {
      e.step = step;
      throw;
    }
  };

  // Instantaneous elastic response at t = 0.
  record(0, 0.0, solve_at(0, 0.0, 0.0));

  const int n_steps = static_cast<int>(std::floor(settings.T / settings.dt + 1e-9));
  for (int n = 1; n <= n_steps; ++n) {
    const double t = n * settings.dt;
    int iterations = 0;
    const scene::Scene::Snapshot snap = scene.snapshot();
    try {
      iterations = solve_at(n, t, settings.dt);
    } catch (const NonConvergenceError&) {
      if (!settings.substep_on_failure) throw;
      scene.restore(snap);
      const double half = 0.5 * settings.dt;
      iterations = solve_at(n, t - half, half);
      iterations += solve_at(n, t, half);
    }
    record(n, t, iterations);
  }
  return history;
}

}  // namespace viscobeam::solver
