#pragma once

#include <optional>

#include "dhj/params.hpp"

namespace dhj {

/// One member of the steady-state family
///
///   V_k(x) = M_b [ (x+k)^alpha - k^alpha ],   alpha = (q-p)/(q-p+1), k >= 0,
///
/// which solves (|V'|^{p-2} V')' + |V'|^q = 0 with V(0) = 0. The carried
/// boundary mass is V_k(1), which decreases strictly from M_b (at k = 0, the
/// singular profile U with U'(0) = +inf) to 0 as k grows. The zero profile
/// (M = 0) is represented separately.
struct SteadyState {
  double p = 0.0;
  double q = 0.0;
  double k = 0.0;      ///< family parameter; 0 for the singular profile
  double mass = 0.0;   ///< V_k(1)
  double m_b = 0.0;    ///< critical mass for (p,q)
  double alpha = 0.0;  ///< profile exponent
  bool zero = false;   ///< true for the M = 0 profile V == 0

  /// Profile value at x in [0,1]. Throws DomainError outside [0,1].
  double value(double x) const;

  /// Profile slope V_k'(x) = M_b alpha (x+k)^{alpha-1}. Throws
  /// SingularityError at x = 0 when k = 0 (the slope diverges there).
  double derivative(double x) const;

  /// Analytic flux |V'|^{p-2} V' = (M_b alpha)^{p-1} (x+k)^{(alpha-1)(p-1)}.
  double flux(double x) const;
};

/// Builds V_k directly from the family parameter k >= 0.
SteadyState steady_from_k(double p, double q, double k);

/// Boundary mass of V_k, i.e. g(k) = M_b [ (1+k)^alpha - k^alpha ].
/// Strictly decreasing in k; evaluated cancellation-free for large k.
double mass_of_k(double p, double q, double k);

/// Solves g(k) = M for the unique k when 0 < M < M_b (bracketed bisection
/// followed by secant refinement, relative accuracy ~1e-13). M within
/// 1e-12 M_b of M_b maps to the singular profile k = 0; M = 0 maps to the
/// zero profile; M > M_b has no steady state (nullopt).
std::optional<SteadyState> solve_k(double M, double p, double q);

/// Max interior residual | d/dx flux + |V'|^q | of the profile evaluated by
/// conservative centered differences of the analytic flux at half points,
/// spacing 1/grid_n (grid_n >= 16 intervals). For k = 0 the singular end is
/// excluded: only x >= 3/sqrt(grid_n) enters. Zero profile returns 0.
double residual(const SteadyState& s, int grid_n);

}  // namespace dhj
