#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dhj/params.hpp"
#include "dhj/solver.hpp"
#include "dhj/steady.hpp"

namespace dhj {

/// Tolerances and windows of the a-priori bound checks and the classifier.
struct MonitorConfig {
  double t0 = 0.1;  ///< u_t upper bound and gradient envelopes active from here
  double t1 = 0.1;  ///< C3 measurement / profile checks start here
  double nu = 1.0;  ///< gradient level that qualifies a profile-check anchor
  double eta = 0.0;  ///< profile-check window; <= 0 picks min(0.1, well-posedness margin)
  double delta = 0.1;      ///< interior band [delta, 1-delta] for C^1 distances
  double slack_c = 1.0;    ///< additive discretization slack c*dx on bound checks
  double sup_tol = 1e-2;   ///< convergence tolerance, sup norm
  double c1_tol = 5e-2;    ///< convergence tolerance, interior C^1
  double critical_rtol = 1e-9;  ///< |M - M_b| band classified as critical mass
  double tail_fraction = 0.2;   ///< trailing share of snapshots for the distance tail
  bool m0_relax = false;  ///< skip u_t-window checks for merely Lipschitz data at M = 0
  kernels::Exec exec = kernels::Exec::openmp;
};

struct Violation {
  std::string bound;
  double t = 0.0;
  double x = -1.0;  ///< -1 when the check is not localized to a node
  double margin = 0.0;
};

/// One bound check over a trajectory; worst <= 0 means fully compliant.
struct BoundCheck {
  std::string name;
  double worst = 0.0;
  std::size_t checked = 0;
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Gradient envelope of the interior bound, finite for x > 0:
///   [((q-p+1)/(p-1) x)^{(1-p)/(q-p+1)} + c1 x]^{1/(p-1)}.
double envelope(double p, double q, double c1, double x);

/// Discrete comparison principle: min u0 <= u(t,x) <= max u0 nodewise,
/// within slack_c * dx.
BoundCheck comparison_check(const Trajectory& traj, const std::vector<double>& u0,
                            const MonitorConfig& cfg);

/// u(t,x) <= ||u0|| + M + 2 - cosh(eps x) nodewise, within slack_c * dx.
BoundCheck supersolution_check(const ProblemParams& prm, const Trajectory& traj,
                               double sup_abs_u0, const MonitorConfig& cfg);

/// One-sided regularizing bound max_x u_t <= ||u0||/((p-2) t) for t >= t0.
BoundCheck ut_upper_bound_check(const ProblemParams& prm, const Trajectory& traj,
                                double sup_abs_u0, const MonitorConfig& cfg);

/// Both gradient envelopes (left form on u_x, mirrored form on -u_x at 1-x)
/// against cell gradients, skipping the cell touching the controlling
/// boundary (the envelope is unbounded there); slack_c * dx additive.
BoundCheck gradient_envelope_check(const ProblemParams& prm, const Trajectory& traj,
                                   double sup_abs_u0, const MonitorConfig& cfg);

/// Windowed sup of |u_t| past t1.
struct UtSupReport {
  double c3 = 0.0;                  ///< sup |u_t| over snapshots with t >= t1
  std::vector<double> window_sups;  ///< four consecutive windows of that range
  bool non_expanding = true;        ///< each window <= 1.05 * previous
  double h_shift_worst = 0.0;       ///< worst ||u(t+h)-u(t)|| / (1.05 C3 h)
  bool h_shift_ok = true;
  std::vector<std::string> warnings;
};

UtSupReport ut_sup_estimate(const Trajectory& traj, double t1);

/// Two-point lower-profile inequality with C4 = C3^{(p-1)/q},
/// C5 = (q-p+1)/(p-1), on cell gradients:
///   [w(t,x)+C4]^{-C5} <= [w+(t,y)+C4]^{-C5} + C5 (x-y)
/// for u_x(t,y) >= nu, y <= x <= y+eta, t >= t1; mirrored near x = 1.
/// For threshold-terminated runs it also tracks how the profile approaches
/// the limiting divergence (C5 x)^{-1/C5} - C4 near the blow-up boundary.
struct DivergenceSample {
  double t = 0.0;
  double min_ratio = 0.0;    ///< min over cells x <= eta of w / max(bound, tiny)
  double x_hold_from = 1.0;  ///< smallest x from which w >= bound up to eta
};

struct ProfileReport {
  double c3 = 0.0, c4 = 0.0, c5 = 0.0;
  double nu = 1.0, eta = 0.0;
  BoundCheck two_point;
  std::vector<DivergenceSample> divergence;  ///< only for threshold-crossed runs
  bool approaching_divergence = false;  ///< min_ratio nondecreasing toward the stop
};

ProfileReport blowup_profile_check(const ProblemParams& prm, const Trajectory& traj,
                                   const MonitorConfig& cfg);

/// Sup distance on [0,1] and gradient distance on [delta, 1-delta] between a
/// grid state and a steady profile (node gradients vs the analytic slope).
struct W1InfDistance {
  double sup = 0.0;
  double interior_c1 = 0.0;
};

W1InfDistance w1inf_distance(const std::vector<double>& u, const SteadyState& target,
                             double delta);

/// Outcome of a run per the dichotomy: convergence to the steady family
/// below the critical mass, certified gradient blow-up above it, and
/// Undetermined whenever neither can be asserted (always at critical mass).
struct Outcome {
  enum class Kind { converged, gradient_blowup, undetermined };
  Kind kind = Kind::undetermined;
  double k = 0.0;         // converged: family parameter
  double distance = 0.0;  // converged: final sup distance
  double c1_distance = 0.0;
  double t_star = 0.0;  // gradient_blowup
  int side = -1;        // 0 = left boundary, 1 = right
  std::string reason;   // undetermined
};

const char* to_string(Outcome::Kind k);

/// Deterministic classification of a finished trajectory. cert may be null
/// for runs that never crossed the threshold; a crossing without a stable
/// certificate is Undetermined, never GradientBlowUp. |M - M_b| within
/// critical_rtol is Undetermined("critical mass") regardless of crossing.
Outcome classify(const ProblemParams& prm, const Trajectory& traj,
                 const BlowupCertificate* cert, const MonitorConfig& cfg);

}  // namespace dhj
