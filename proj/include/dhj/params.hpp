#pragma once

#include <string>

namespace dhj {

/// Parameters of the boundary value problem
///
///   u_t = (|u_x|^{p-2} u_x)_x + |u_x|^q   on (0,1),
///   u(t,0) = 0,  u(t,1) = M,
///
/// in the degenerate regime q > p > 2, together with the gradient
/// regularization strength eps used by the time stepper and the Lyapunov
/// machinery (both replace u_x^2 by u_x^2 + eps^2).
struct ProblemParams {
  double p = 3.0;    ///< diffusion exponent, p > 2
  double q = 4.0;    ///< source exponent, q > p
  double M = 1.0;    ///< boundary mass, M >= 0
  double eps = 0.1;  ///< regularization, 0 < eps < min(1/2, cosh(1)^{(p-1-q)/(q-p)})
  double K = 0.0;    ///< Lyapunov domain bound; 0 means "use the default rule"
};

/// Constants derived from (p, q, M) that the steady family, the monitor
/// bounds and the blow-up profile checks share.
struct DerivedConstants {
  double m_b = 0.0;    ///< critical mass M_b
  double alpha = 0.0;  ///< profile exponent (q-p)/(q-p+1)
  double c5 = 0.0;     ///< profile modulus (q-p+1)/(p-1)
};

/// Critical boundary mass
///   M_b = (q-p+1)/(q-p) * ((q-p+1)/(p-1))^{1/(p-1-q)}.
/// Throws RangeError unless q > p > 2.
double critical_mass(double p, double q);

/// Exponent of the steady profile family, alpha = (q-p)/(q-p+1) in (0,1).
double alpha_exponent(double p, double q);

/// Largest admissible regularization, min(1/2, cosh(1)^{(p-1-q)/(q-p)}).
/// Below this bound the comparison function |u0| + M + 2 - cosh(eps x)
/// stays a supersolution of the regularized problem.
double epsilon_bound(double p, double q);

/// Gradient-envelope constant C1 = sup|u0| / ((p-2) t0) for t >= t0 > 0.
double c1_constant(double sup_u0, double t0, double p);

/// Default Lyapunov domain bound, max(sup|u0|, M) + 1.
double default_K(double sup_u0, double M);

/// Validates all invariants of `prm` (q > p > 2 strictly, M >= 0, the eps
/// window, K >= max(sup|u0|, M) when set) and fills in the default K when
/// prm.K == 0. Throws RangeError with a message naming the violated
/// invariant. Idempotent. Returns the derived constants.
DerivedConstants validate(ProblemParams& prm, double sup_u0);

/// Derived constants without touching the params (params must be valid).
DerivedConstants derive(const ProblemParams& prm);

}  // namespace dhj
