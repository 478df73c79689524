#include "dhj/steady.hpp"

#include <cmath>
#include <string>

#include "dhj/errors.hpp"

namespace dhj {

namespace {

void require_x(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw DomainError("steady profile evaluated outside [0,1]: x = " + std::to_string(x));
}

}  // namespace

double SteadyState::value(double x) const {
  require_x(x);
  if (zero) return 0.0;
  if (k == 0.0) return m_b * std::pow(x, alpha);
  return m_b * (std::pow(x + k, alpha) - std::pow(k, alpha));
}

double SteadyState::derivative(double x) const {
  require_x(x);
  if (zero) return 0.0;
  if (k == 0.0 && x == 0.0)
    throw SingularityError("V_0'(0) diverges: the singular profile has infinite slope at x = 0");
  return m_b * alpha * std::pow(x + k, alpha - 1.0);
}

double SteadyState::flux(double x) const {
  require_x(x);
  if (zero) return 0.0;
  if (k == 0.0 && x == 0.0) throw SingularityError("flux of the singular profile diverges at x = 0");
  return std::pow(m_b * alpha, p - 1.0) * std::pow(x + k, (alpha - 1.0) * (p - 1.0));
}

SteadyState steady_from_k(double p, double q, double k) {
  if (!(k >= 0.0)) throw RangeError("steady_from_k: need k >= 0");
  SteadyState s;
  s.p = p;
  s.q = q;
  s.k = k;
  s.m_b = critical_mass(p, q);
  s.alpha = alpha_exponent(p, q);
  s.mass = mass_of_k(p, q, k);
  return s;
}

double mass_of_k(double p, double q, double k) {
  const double mb = critical_mass(p, q);
  const double a = alpha_exponent(p, q);
  if (k == 0.0) return mb;
  if (k > 1.0) return mb * std::pow(k, a) * std::expm1(a * std::log1p(1.0 / k));
  return mb * (std::pow(1.0 + k, a) - std::pow(k, a));
}

std::optional<SteadyState> solve_k(double M, double p, double q) {
  const double mb = critical_mass(p, q);
  if (!(M >= 0.0)) throw RangeError("solve_k: need M >= 0");
  if (M == 0.0) {
    SteadyState s = steady_from_k(p, q, 0.0);
    s.zero = true;
    s.mass = 0.0;
    s.k = 0.0;
    return s;
  }
  if (M > mb * (1.0 + 1e-12)) return std::nullopt;
  if (std::abs(M - mb) <= 1e-12 * mb) return steady_from_k(p, q, 0.0);

  auto g = [&](double k) { return mass_of_k(p, q, k); };
  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (g(hi) > M) {
    hi *= 2.0;
    if (++guard > 80) throw ConvergenceError("solve_k: failed to bracket g(k) = M");
  }
  // bisection to a safe bracket, then secant refinement
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > M ? lo : hi) = mid;
  }
  double a = lo, b = hi, fa = g(a) - M, fb = g(b) - M;
  for (int it = 0; it < 8 && fa != fb; ++it) {
    const double c = b - fb * (b - a) / (fb - fa);
    if (!(c >= lo && c <= hi)) break;
    const double fc = g(c) - M;
    a = b;
    fa = fb;
    b = c;
    fb = fc;
    if (std::abs(fc) < 1e-15 * std::max(1.0, M)) break;
  }
  const double k = std::abs(fb) < std::abs(fa) ? b : a;
  if (std::abs(g(k) - M) > 1e-10 * std::max(1.0, M))
    throw ConvergenceError("solve_k: refinement stalled at |g(k)-M| = " +
                           std::to_string(std::abs(g(k) - M)));
  return steady_from_k(p, q, k);
}

double residual(const SteadyState& s, int grid_n) {
  if (grid_n < 16) throw RangeError("residual: need grid_n >= 16");
  if (s.zero) return 0.0;
  const double h = 1.0 / grid_n;
  const double x_min = (s.k == 0.0) ? 3.0 / std::sqrt(static_cast<double>(grid_n)) : 0.0;
  double worst = 0.0;
  for (int i = 1; i < grid_n; ++i) {
    const double x = i * h;
    if (x < x_min) continue;
    const double dflux = (s.flux(x + 0.5 * h) - s.flux(x - 0.5 * h)) / h;
    const double vp = s.derivative(x);
    worst = std::max(worst, std::abs(dflux + std::pow(std::abs(vp), s.q)));
  }
  return worst;
}

}  // namespace dhj
