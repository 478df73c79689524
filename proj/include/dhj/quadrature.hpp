#pragma once

#include <cmath>
#include <cstdint>

#include "dhj/errors.hpp"

namespace dhj {

/// Adaptive-Simpson configuration shared by the Lyapunov evaluator.
struct QuadConfig {
  double abs_tol = 1e-10;  ///< absolute tolerance on each integral
  int max_depth = 48;      ///< recursion budget before QuadratureError
};

namespace detail {

template <typename F>
double simpson_rec(const F& f, double a, double fa, double b, double fb, double m, double fm,
                   double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double h6 = (b - a) / 12.0;
  const double left = h6 * (fa + 4.0 * flm + fm);
  const double right = h6 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  // |b - a|: reversed limits integrate with a negative interval length, which
  // must not trip the width floor or the whole range collapses to one panel.
  if (std::abs(delta) <= 15.0 * tol ||
      std::abs(b - a) < 1e-14 * (1.0 + std::abs(a) + std::abs(b)))
    return left + right + delta / 15.0;
  if (depth <= 0) throw QuadratureError("adaptive Simpson: recursion budget exhausted");
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Integrates f over [a, b] with adaptive Simpson to absolute tolerance
/// `cfg.abs_tol`. Throws QuadratureError when the recursion budget runs out.
///
/// Example: adaptive_simpson([](double x){ return x*x; }, 0, 1, {}) == 1/3.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, const QuadConfig& cfg = {}) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
    throw NonFiniteError("adaptive Simpson: integrand not finite");
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, fa, b, fb, m, fm, whole, cfg.abs_tol, cfg.max_depth);
}

/// Central-difference step size for differentiating values that carry an
/// absolute quadrature error `quad_tol`: h ~ quad_tol^{1/3}, scaled by the
/// magnitude of the argument.
inline double fd_step(double quad_tol, double arg) {
  return std::cbrt(quad_tol) * std::max(1.0, std::abs(arg));
}

}  // namespace dhj
