#include "dhj/params.hpp"

#include <cmath>
#include <sstream>

#include "dhj/errors.hpp"

namespace dhj {

namespace {

void require_exponents(double p, double q) {
  if (!(p > 2.0) || !std::isfinite(p))
    throw RangeError("exponent invariant violated: need p > 2, got p = " + std::to_string(p));
  if (!(q > p) || !std::isfinite(q))
    throw RangeError("exponent invariant violated: need q > p, got q = " + std::to_string(q) +
                     ", p = " + std::to_string(p));
}

}  // namespace

double critical_mass(double p, double q) {
  require_exponents(p, q);
  return (q - p + 1.0) / (q - p) * std::pow((q - p + 1.0) / (p - 1.0), 1.0 / (p - 1.0 - q));
}

double alpha_exponent(double p, double q) {
  require_exponents(p, q);
  return (q - p) / (q - p + 1.0);
}

double epsilon_bound(double p, double q) {
  require_exponents(p, q);
  return std::min(0.5, std::pow(std::cosh(1.0), (p - 1.0 - q) / (q - p)));
}

double c1_constant(double sup_u0, double t0, double p) {
  if (!(p > 2.0)) throw RangeError("c1_constant: need p > 2");
  if (!(t0 > 0.0)) throw RangeError("c1_constant: need t0 > 0");
  if (!(sup_u0 >= 0.0)) throw RangeError("c1_constant: need sup|u0| >= 0");
  return sup_u0 / ((p - 2.0) * t0);
}

double default_K(double sup_u0, double M) { return std::max(sup_u0, M) + 1.0; }

DerivedConstants derive(const ProblemParams& prm) {
  DerivedConstants d;
  d.m_b = critical_mass(prm.p, prm.q);
  d.alpha = alpha_exponent(prm.p, prm.q);
  d.c5 = (prm.q - prm.p + 1.0) / (prm.p - 1.0);
  return d;
}

DerivedConstants validate(ProblemParams& prm, double sup_u0) {
  require_exponents(prm.p, prm.q);
  if (!(prm.M >= 0.0) || !std::isfinite(prm.M))
    throw RangeError("mass invariant violated: need M >= 0, got M = " + std::to_string(prm.M));
  const double eb = epsilon_bound(prm.p, prm.q);
  if (!(prm.eps > 0.0) || !(prm.eps < eb)) {
    std::ostringstream os;
    os << "eps invariant violated: need 0 < eps < min(1/2, cosh(1)^((p-1-q)/(q-p))) = " << eb
       << ", got eps = " << prm.eps;
    throw RangeError(os.str());
  }
  if (prm.K == 0.0) {
    prm.K = default_K(sup_u0, prm.M);
  } else if (!(prm.K >= std::max(sup_u0, prm.M)) || !(prm.K > 0.0)) {
    throw RangeError("K invariant violated: need K >= max(sup|u0|, M) > 0, got K = " +
                     std::to_string(prm.K));
  }
  return derive(prm);
}

}  // namespace dhj
