#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dhj/kernels.hpp"
#include "dhj/params.hpp"
#include "dhj/quadrature.hpp"

namespace dhj {

/// Rectangular evaluation grid for the structural identity checks.
struct CheckGrid {
  double u_lo = -1.0, u_hi = 1.0;
  double v_lo = -3.0, v_hi = 3.0;
  int nu = 21, nv = 21;
  double h = 1e-3;  ///< centered-difference step
};

/// Worst residual of a pointwise identity over a CheckGrid.
struct ResidualScan {
  double max_abs = 0.0;
  double arg_u = 0.0, arg_v = 0.0;  ///< where the worst residual sits
};

/// Per-step report of the discrete dissipation structure of L.
struct DissipationReport {
  std::size_t steps = 0;
  double l_first = 0.0, l_last = 0.0;
  double worst_monotonicity = 0.0;  ///< max over steps of dL - tol_abs(dt); <= 0 when monotone
  double worst_identity_rel = 0.0;  ///< max relative mismatch of dL vs -dt*Int(Psi u_t^2)
  std::size_t identity_checked = 0;
  double accum_psi = 0.0;   ///< sum of dt * Int Psi u_t^2 (the dissipated amount)
  double accum_cala = 0.0;  ///< sum of dt * Int A(u,u_x) u_t^2 (epsilon-free weight)
  bool identity_ok = true;  ///< worst_identity_rel within the requested tol_rel
  std::vector<std::size_t> monotonicity_violations;  ///< offending step indices
  std::vector<double> dl;    ///< per step: L_{i+1} - L_i
  std::vector<double> diss;  ///< per step: dt_i * Int Psi u_t^2 (midpoint state)
  bool monotone_ok() const { return monotonicity_violations.empty(); }
};

/// Zelenyak-type Lyapunov machinery for the regularized equation. All
/// members are defined for |u| <= K; evaluations outside raise DomainError.
///
/// The generating function is
///   f(u,v) = [ 1 + (q-p)/(p-1) (v^2+eps^2)^{(q-p)/2} (K+1-u) ]^{-(q-p+2)/(q-p)},
/// the density Phi(u,v) = rho(u,v) - Int_0^u H(s) ds + (K+1) with
/// rho(u,v) = Int_0^v Int_0^z f(u,s) ds dz and H(u) = eps^{q-p+2} f(u,0)/(p-1),
/// and the dissipation weight Psi(u,v) = (v^2+eps^2)^{(2-p)/2} f(u,v)/(p-1).
class LyapunovEvaluator {
 public:
  LyapunovEvaluator(const ProblemParams& prm, QuadConfig quad = {});

  double p() const { return p_; }
  double q() const { return q_; }
  double K() const { return K_; }
  double eps() const { return eps_; }
  const QuadConfig& quad() const { return quad_; }

  /// Generating function; 0 < f <= 1, even in v, increasing in u.
  double f(double u, double v) const;
  /// Analytic partial f_u (used by tests and cross-checks).
  double f_u(double u, double v) const;
  /// Analytic partial f_v.
  double f_v(double u, double v) const;

  /// rho(u,v) = Int_0^v (v-s) f(u,s) ds (exact collapse of the double
  /// integral), adaptive Simpson at the configured tolerance. Even in v,
  /// rho(u,0) = 0, 0 <= rho <= v^2/2.
  double rho(double u, double v) const;

  /// H(u) = eps^{q-p+2} f(u,0)/(p-1), using (rho)_u(u,0) = 0 exactly.
  double h_func(double u) const;

  /// Int_0^u H(s) ds in closed form (f(.,0) has a power antiderivative).
  double int_h(double u) const;

  /// Lyapunov density Phi = rho - Int H + (K+1); 0 <= Phi <= v^2+|u|+K+1.
  double phi(double u, double v) const;

  /// Dissipation weight Psi = (v^2+eps^2)^{(2-p)/2} f/(p-1) > 0.
  double psi(double u, double v) const;

  /// L[u] = Int_0^1 Phi(u, u_x) dx by the composite midpoint rule on cells,
  /// with cell-average u and cell gradient. u spans the full grid including
  /// both boundary nodes; dx = 1/(u.size()-1).
  double lyapunov_value(std::span<const double> u, kernels::Exec ex) const;

  /// Residual scan of the defining identity of Phi,
  ///   Phi_u - v Phi_uv + (v^2+eps^2)^{(q-p+2)/2}/(p-1) Phi_vv = 0,
  /// all derivatives by centered differences with step g.h. The grid must
  /// stay inside |u| <= K - g.h. Phi is integrated at a tightened tolerance
  /// (<= 1e-13) internally: the h^2 division amplifies quadrature noise by
  /// ~4/h^2, which would swamp the residual at the default tolerance.
  ResidualScan check_eqdif(const CheckGrid& g, kernels::Exec ex) const;

  /// Residual scan of the characteristic equation of f,
  ///   f_u - (q-p+2)/(p-1) (v^2+eps^2)^{(q-p)/2} f
  ///       - (v^2+eps^2)^{(q-p+2)/2} / ((p-1) v) f_v = 0,  v != 0,
  /// with centered differences on the analytic f. Use v_lo > 0 (the scan
  /// also covers the mirrored negative-v rectangle).
  ResidualScan check_tou(const CheckGrid& g, kernels::Exec ex) const;

  /// Per-step monotonicity and identity report over a sequence of accepted
  /// states (full grid vectors sharing one spacing; dts[i] advanced
  /// states[i] to states[i+1]). tol_abs(dt) = 1e-8 + 1e-3 dt; the identity
  /// is checked relatively (tol_rel) for steps past t_transient with
  /// |dL| > floor.
  DissipationReport dissipation_check(const std::vector<std::vector<double>>& states,
                                      const std::vector<double>& dts, double t_first,
                                      kernels::Exec ex, double tol_rel = 0.1,
                                      double t_transient = 0.1, double floor = 1e-12) const;

 private:
  void require_domain(double u) const;
  double rho_q(double u, double v, const QuadConfig& qc) const;
  double phi_q(double u, double v, const QuadConfig& qc) const;

  double p_, q_, K_, eps_;
  double m_;    ///< q - p
  double cf_;   ///< (q-p)/(p-1)
  double ef_;   ///< -(q-p+2)/(q-p)
  QuadConfig quad_;
};

/// Epsilon-free lower weight
///   A(u,v) = (v^2+1)^{(2-p)/2}/(p-1) [ 1 + (q-p)/(p-1)(v^2+1)^{(q-p)/2}(K+1-u) ]^{-(q-p+2)/(q-p)};
/// satisfies 0 < A <= Psi_eps for every eps in (0, 1/2].
double cal_a(double p, double q, double K, double u, double v);

/// theta(K,R) = inf of A over |u| <= K, |v| <= R; the infimum sits at
/// u = -K, |v| = R, so this is cal_a(p,q,K,-K,R).
double theta_inf(double p, double q, double K, double R);

}  // namespace dhj
