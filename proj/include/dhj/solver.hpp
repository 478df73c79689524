#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "dhj/kernels.hpp"
#include "dhj/params.hpp"

namespace dhj {

enum class Stepper { semi_implicit, explicit_euler };

/// Time-integration configuration. The grid has n interior nodes, spacing
/// dx = 1/(n+1); state vectors carry n+2 entries including both boundary
/// nodes, which stay pinned to u(0) = 0 and u(1) = M exactly.
struct SolveConfig {
  std::size_t n = 200;
  Stepper stepper = Stepper::semi_implicit;
  double dt_init = 1e-5;
  double dt_min = 1e-12;  ///< ConvergenceError below this after rejections
  double dt_max = 1e-3;
  double cfl_safety = 0.4;  ///< explicit stepper: dt <= cfl_safety dx^2 / max D
  double du_max = 2e-3;     ///< accept a semi-implicit step iff max|du| <= 2 du_max
  double t_end = 20.0;
  double blowup_grad_threshold = 20.0;  ///< sup |cell gradient| that stops the run; <= 0 disables
  double snapshot_dt = 0.05;
  double early_stop_ut = 0.0;     ///< stop once sup|u_t| drops below this; 0 disables
  double early_stop_t_min = 0.5;  ///< never early-stop before this time
  bool record_steps = false;      ///< keep every accepted state (dissipation checks)
  kernels::Exec exec = kernels::Exec::openmp;

  /// Optional source term f(x, t) added to the right-hand side, evaluated at
  /// the start of each step. A manufactured-solution hook for convergence
  /// tests; it is not part of the serialized configuration.
  std::function<double(double, double)> forcing;
};

enum class SolveStatus { reached_t_end, threshold_crossed, early_stopped };

const char* to_string(SolveStatus s);

struct Snapshot {
  double t = 0.0;
  std::vector<double> u;
  double max_ut = 0.0;      ///< signed max of the last step's difference quotient
  double sup_abs_ut = 0.0;  ///< sup |u_t| of the last step
  double dt = 0.0;          ///< step size in effect
};

struct GradSample {
  double t;
  double sup = 0.0;  ///< sup over cells of |(u_{i+1}-u_i)/dx|
};

struct Trajectory {
  SolveStatus status = SolveStatus::reached_t_end;
  std::vector<Snapshot> snapshots;  ///< first at t_start, last at the stop time
  std::vector<GradSample> grad_series;  ///< one sample per accepted step

  std::optional<double> t_star;  ///< threshold crossing, linearly interpolated
  int blow_side = -1;            ///< 0 = x=0, 1 = x=1 (cell of the max gradient)
  double grad_at_stop = 0.0;

  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
  double udot_sq_integral = 0.0;  ///< Int Int u_t^2 dx dt over the whole run

  // Populated only when record_steps: states[0] is the initial condition and
  // dts[i] advanced states[i] to states[i+1].
  std::vector<std::vector<double>> step_states;
  std::vector<double> step_dts;

  const Snapshot& final_state() const { return snapshots.back(); }
};

/// Integrates the regularized equation from u0 (n+2 nodes, boundaries 0 and
/// M within 1e-12; they are re-pinned exactly). Snapshots are taken at
/// t_start + j snapshot_dt and at the stop time. Throws RangeError on bad
/// shapes, NonFiniteError if the explicit stepper leaves the reals, and
/// ConvergenceError when step rejection drives dt below dt_min.
Trajectory solve(const ProblemParams& prm, std::vector<double> u0, const SolveConfig& cfg,
                 double t_start = 0.0);

/// Refinement certificate for a threshold crossing: the same run at halved
/// grid spacing (n -> 2n+1) and at halved time resolution (dt_init, dt_max,
/// du_max all halved). The crossing is stable when both relative shifts stay
/// within tol.
struct BlowupCertificate {
  double t_star_base = 0.0;
  std::optional<double> t_star_dx2, t_star_dt2;
  double rel_shift_dx = 0.0, rel_shift_dt = 0.0;
  bool stable(double tol = 0.10) const;
};

/// u0_of_n builds the initial condition for a given interior-node count (the
/// dx/2 rerun needs it re-sampled). The base config must have a positive
/// gradient threshold and the base run must cross it; otherwise RangeError.
BlowupCertificate certify_blowup(const ProblemParams& prm, const SolveConfig& cfg,
                                 const std::function<std::vector<double>(std::size_t)>& u0_of_n);

/// Regularization continuation: re-runs the same problem at each eps level
/// (strictly decreasing, at least three) and compares consecutive levels at
/// the common snapshot times.
struct ContinuationReport {
  std::vector<double> eps_levels;
  std::vector<double> distances;      ///< sup over common snapshots of sup|u_a - u_b|
  std::vector<double> sup_gradients;  ///< per level: max over snapshots of sup|u_x|
  std::vector<double> udot_sq_integrals;  ///< per level: Int Int u_t^2
  bool cauchy_ok = false;
};

/// cauchy_tol = 0 demands strictly decreasing consecutive distances; a
/// positive value additionally accepts any distance already below it. With
/// strict = true a failing sequence raises ConvergenceError instead of just
/// clearing the flag.
ContinuationReport eps_continuation(ProblemParams prm, const std::vector<double>& u0,
                                    const SolveConfig& cfg, const std::vector<double>& eps_levels,
                                    double cauchy_tol = 0.0, bool strict = false);

}  // namespace dhj
