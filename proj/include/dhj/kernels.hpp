#pragma once

#include <cstddef>
#include <span>

namespace dhj::kernels {

/// Execution mode of the grid kernels. `openmp` is the production path;
/// `serial` is the reference implementation the tests compare against.
/// Both paths evaluate identical per-element expressions and reduce in a
/// fixed order, so results agree bit for bit for any thread count.
enum class Exec { serial, openmp };

/// Nodal gradient of u on a uniform grid with spacing dx: second-order
/// centered differences at interior nodes, one-sided three-point stencils at
/// the two boundary nodes. g.size() == u.size() >= 3.
void node_gradients(Exec ex, std::span<const double> u, double dx, std::span<double> g);

/// Cell (midpoint) gradients s_i = (u_{i+1} - u_i)/dx, i = 0..n;
/// s.size() == u.size() - 1.
void cell_gradients(Exec ex, std::span<const double> u, double dx, std::span<double> s);

/// Right-hand side of the regularized equation at the interior nodes,
///   r_i = (p-1) (g_i^2 + eps^2)^{(p-2)/2} lap_i + (g_i^2 + eps^2)^{q/2},
/// with centered g_i and the compact three-point Laplacian.
/// r.size() == u.size() - 2.
void rhs_interior(Exec ex, std::span<const double> u, double dx, double p, double q, double eps,
                  std::span<double> r);

/// Frozen coefficients of the semi-implicit step at the interior nodes:
/// diffusivity D_i = (p-1)(g_i^2+eps^2)^{(p-2)/2} and source
/// S_i = (g_i^2+eps^2)^{q/2}. D.size() == S.size() == u.size() - 2.
void flux_coeffs(Exec ex, std::span<const double> u, double dx, double p, double q, double eps,
                 std::span<double> D, std::span<double> S);

double max_value(Exec ex, std::span<const double> v);
double min_value(Exec ex, std::span<const double> v);
double max_abs(Exec ex, std::span<const double> v);

/// Fixed-order pairwise summation; deterministic for both execution modes.
double pairwise_sum(std::span<const double> v);

/// Solves the tridiagonal system (lower, diag, upper) x = rhs in place
/// (rhs becomes x). Inherently sequential; both modes share it.
void thomas_solve(std::span<const double> lower, std::span<const double> diag,
                  std::span<const double> upper, std::span<double> rhs);

/// Applies f(i) for i in [0, n). The openmp mode parallelizes over i; f must
/// write only to position i of its outputs.
template <typename F>
void for_each_index(Exec ex, std::ptrdiff_t n, F&& f) {
  if (ex == Exec::openmp) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
  }
}

}  // namespace dhj::kernels
