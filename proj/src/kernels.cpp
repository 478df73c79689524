#include "dhj/kernels.hpp"

#include <cassert>
#include <cmath>
#include <vector>

namespace dhj::kernels {

namespace {

inline double node_grad_at(std::span<const double> u, double dx, std::ptrdiff_t i) {
  const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(u.size()) - 1;
  if (i == 0) return (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
  if (i == last) return (3.0 * u[last] - 4.0 * u[last - 1] + u[last - 2]) / (2.0 * dx);
  return (u[i + 1] - u[i - 1]) / (2.0 * dx);
}

inline double rhs_at(std::span<const double> u, double dx, double p, double q, double eps,
                     std::ptrdiff_t i) {
  const double g = (u[i + 1] - u[i - 1]) / (2.0 * dx);
  // (u_{i+1} + u_{i-1}) first: keeps the stencil bit-exact under reflection
  const double lap = ((u[i + 1] + u[i - 1]) - 2.0 * u[i]) / (dx * dx);
  const double w = g * g + eps * eps;
  return (p - 1.0) * std::pow(w, 0.5 * (p - 2.0)) * lap + std::pow(w, 0.5 * q);
}

}  // namespace

void node_gradients(Exec ex, std::span<const double> u, double dx, std::span<double> g) {
  assert(u.size() == g.size() && u.size() >= 3);
  const auto n = static_cast<std::ptrdiff_t>(u.size());
  for_each_index(ex, n, [&](std::ptrdiff_t i) { g[i] = node_grad_at(u, dx, i); });
}

void cell_gradients(Exec ex, std::span<const double> u, double dx, std::span<double> s) {
  assert(s.size() + 1 == u.size());
  const auto n = static_cast<std::ptrdiff_t>(s.size());
  for_each_index(ex, n, [&](std::ptrdiff_t i) { s[i] = (u[i + 1] - u[i]) / dx; });
}

void rhs_interior(Exec ex, std::span<const double> u, double dx, double p, double q, double eps,
                  std::span<double> r) {
  assert(r.size() + 2 == u.size());
  const auto n = static_cast<std::ptrdiff_t>(r.size());
  for_each_index(ex, n, [&](std::ptrdiff_t i) { r[i] = rhs_at(u, dx, p, q, eps, i + 1); });
}

void flux_coeffs(Exec ex, std::span<const double> u, double dx, double p, double q, double eps,
                 std::span<double> D, std::span<double> S) {
  assert(D.size() + 2 == u.size() && S.size() == D.size());
  const auto n = static_cast<std::ptrdiff_t>(D.size());
  for_each_index(ex, n, [&](std::ptrdiff_t i) {
    const double g = (u[i + 2] - u[i]) / (2.0 * dx);
    const double w = g * g + eps * eps;
    D[i] = (p - 1.0) * std::pow(w, 0.5 * (p - 2.0));
    S[i] = std::pow(w, 0.5 * q);
  });
}

double max_value(Exec ex, std::span<const double> v) {
  assert(!v.empty());
  double m = v[0];
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  if (ex == Exec::openmp) {
#pragma omp parallel for reduction(max : m) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  }
  return m;
}

double min_value(Exec ex, std::span<const double> v) {
  assert(!v.empty());
  double m = v[0];
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  if (ex == Exec::openmp) {
#pragma omp parallel for reduction(min : m) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) m = std::min(m, v[i]);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) m = std::min(m, v[i]);
  }
  return m;
}

double max_abs(Exec ex, std::span<const double> v) {
  assert(!v.empty());
  double m = std::abs(v[0]);
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  if (ex == Exec::openmp) {
#pragma omp parallel for reduction(max : m) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) m = std::max(m, std::abs(v[i]));
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) m = std::max(m, std::abs(v[i]));
  }
  return m;
}

double pairwise_sum(std::span<const double> v) {
  const size_t n = v.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = v[0];
    for (size_t i = 1; i < n; ++i) s += v[i];
    return s;
  }
  const size_t half = n / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

void thomas_solve(std::span<const double> lower, std::span<const double> diag,
                  std::span<const double> upper, std::span<double> rhs) {
  const size_t n = rhs.size();
  assert(lower.size() == n && diag.size() == n && upper.size() == n && n >= 1);
  static thread_local std::vector<double> cp;
  cp.resize(n);
  cp[0] = upper[0] / diag[0];
  rhs[0] = rhs[0] / diag[0];
  for (size_t i = 1; i < n; ++i) {
    const double m = diag[i] - lower[i] * cp[i - 1];
    cp[i] = upper[i] / m;
    rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / m;
  }
  for (size_t i = n - 1; i-- > 0;) rhs[i] -= cp[i] * rhs[i + 1];
}

}  // namespace dhj::kernels
