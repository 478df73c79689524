#include "dhj/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dhj/errors.hpp"

namespace dhj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_problem(const ProblemParams& prm) {
  if (!(prm.p > 2.0) || !(prm.q > prm.p))
    throw RangeError("exponent invariant violated: need q > p > 2");
  if (!(prm.eps > 0.0)) throw RangeError("eps invariant violated: need eps > 0");
  if (!(prm.M >= 0.0)) throw RangeError("mass invariant violated: need M >= 0");
}

// Scratch buffers of one solve; sized once.
struct Workspace {
  std::vector<double> newu, gfull, dfull, r, D, S, lower, diag, upper, rhs, cellg, diff2, force;
};

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::reached_t_end: return "reached_t_end";
    case SolveStatus::threshold_crossed: return "threshold_crossed";
    case SolveStatus::early_stopped: return "early_stopped";
  }
  return "?";
}

bool BlowupCertificate::stable(double tol) const {
  return t_star_dx2.has_value() && t_star_dt2.has_value() && rel_shift_dx <= tol &&
         rel_shift_dt <= tol;
}

Trajectory solve(const ProblemParams& prm, std::vector<double> u0, const SolveConfig& cfg,
                 double t_start) {
  require_problem(prm);
  const std::size_t n = cfg.n;
  if (n < 1) throw RangeError("solve: need at least one interior node");
  if (u0.size() != n + 2) throw RangeError("solve: u0 must have n + 2 nodes");
  if (!(cfg.snapshot_dt > 0.0)) throw RangeError("solve: snapshot_dt must be positive");
  if (!(cfg.dt_init > 0.0) || !(cfg.dt_max > 0.0) || !(cfg.du_max > 0.0))
    throw RangeError("solve: dt_init, dt_max and du_max must be positive");
  if (std::abs(u0.front()) > 1e-12 || std::abs(u0.back() - prm.M) > 1e-12 * std::max(1.0, prm.M))
    throw RangeError("solve: u0 must satisfy the boundary pins u(0) = 0, u(1) = M");
  u0.front() = 0.0;
  u0.back() = prm.M;

  const double dx = 1.0 / static_cast<double>(n + 1);
  const double p = prm.p, q = prm.q, eps = prm.eps, M = prm.M;
  const auto ex = cfg.exec;

  Trajectory tr;
  std::vector<double> u = std::move(u0);
  double t = t_start;
  double dt = cfg.dt_init;
  int grow = 0;
  bool have_prev = false;
  double t_last = t_start, sup_last = 0.0;

  Workspace w;
  w.newu.assign(n + 2, 0.0);
  w.gfull.resize(n + 2);
  w.dfull.resize(n + 2);
  w.r.resize(n);
  w.D.resize(n);
  w.S.resize(n);
  w.lower.resize(n);
  w.diag.resize(n);
  w.upper.resize(n);
  w.rhs.resize(n);
  w.cellg.resize(n + 1);
  w.diff2.resize(n);
  w.force.assign(n, 0.0);

  auto take_snapshot = [&](double max_ut, double sup_abs_ut, double dt_used) {
    if (!tr.snapshots.empty() && !(tr.snapshots.back().t < t - 1e-15)) return;
    tr.snapshots.push_back({t, u, max_ut, sup_abs_ut, dt_used});
  };

  tr.snapshots.push_back({t, u, 0.0, 0.0, dt});
  if (cfg.record_steps) tr.step_states.push_back(u);
  double next_snap = t_start + cfg.snapshot_dt;

  double last_max_ut = 0.0, last_sup_abs_ut = 0.0;

  while (t < cfg.t_end - 1e-14) {
    dt = std::min({dt, cfg.dt_max, cfg.t_end - t, next_snap - t + 1e-18});

    if (cfg.forcing)  // values are fixed across the rejection loop (same t)
      for (std::size_t i = 0; i < n; ++i)
        w.force[i] = cfg.forcing(static_cast<double>(i + 1) * dx, t);

    if (cfg.stepper == Stepper::explicit_euler) {
      kernels::node_gradients(ex, u, dx, w.gfull);
      kernels::for_each_index(ex, static_cast<std::ptrdiff_t>(n + 2), [&](std::ptrdiff_t i) {
        const double ww = w.gfull[i] * w.gfull[i] + eps * eps;
        w.dfull[i] = (p - 1.0) * std::pow(ww, 0.5 * (p - 2.0));
      });
      const double max_d = kernels::max_value(ex, w.dfull);
      dt = std::min(dt, cfg.cfl_safety * dx * dx / max_d);
    }

    double du = 0.0;
    while (true) {
      bool finite = true;
      if (cfg.stepper == Stepper::explicit_euler) {
        kernels::rhs_interior(ex, u, dx, p, q, eps, w.r);
        if (cfg.forcing)
          kernels::for_each_index(ex, static_cast<std::ptrdiff_t>(n),
                                  [&](std::ptrdiff_t i) { w.r[i] += w.force[i]; });
        w.newu.front() = 0.0;
        w.newu.back() = M;
        kernels::for_each_index(ex, static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t i) {
          w.newu[i + 1] = u[i + 1] + dt * w.r[i];
        });
      } else {
        kernels::flux_coeffs(ex, u, dx, p, q, eps, w.D, w.S);
        const double r_ = dt / (dx * dx);
        kernels::for_each_index(ex, static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t i) {
          w.lower[i] = -r_ * w.D[i];
          w.diag[i] = 1.0 + 2.0 * r_ * w.D[i];
          w.upper[i] = -r_ * w.D[i];
          w.rhs[i] = u[i + 1] + dt * w.S[i];
        });
        if (cfg.forcing)
          kernels::for_each_index(ex, static_cast<std::ptrdiff_t>(n),
                                  [&](std::ptrdiff_t i) { w.rhs[i] += dt * w.force[i]; });
        w.rhs[n - 1] += r_ * w.D[n - 1] * M;  // u(1) = M; u(0) = 0 adds nothing
        kernels::thomas_solve(w.lower, w.diag, w.upper, w.rhs);
        w.newu.front() = 0.0;
        w.newu.back() = M;
        std::copy(w.rhs.begin(), w.rhs.end(), w.newu.begin() + 1);
      }

      kernels::for_each_index(ex, static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t i) {
        w.diff2[i] = w.newu[i + 1] - u[i + 1];
      });
      du = kernels::max_abs(ex, w.diff2);
      // max() can swallow NaN; the pairwise sum propagates any non-finite node
      finite = std::isfinite(du) && std::isfinite(kernels::pairwise_sum(w.diff2));

      if (cfg.stepper == Stepper::explicit_euler) {
        if (!finite) throw NonFiniteError("solve: explicit step left the reals");
        if (du <= 2.0 * cfg.du_max) break;
      } else if (finite && du <= 2.0 * cfg.du_max) {
        break;
      }
      dt *= 0.5;
      grow = 0;
      ++tr.steps_rejected;
      if (dt < cfg.dt_min)
        throw ConvergenceError("solve: dt underflow, step rejection drove dt below dt_min");
    }

    last_max_ut = kernels::max_value(ex, w.diff2) / dt;
    last_sup_abs_ut = du / dt;
    {  // Int u_t^2 dx over this step, accumulated as dt * dx * sum((du/dt)^2)
      kernels::for_each_index(ex, static_cast<std::ptrdiff_t>(n),
                              [&](std::ptrdiff_t i) { w.diff2[i] *= w.diff2[i]; });
      tr.udot_sq_integral += dx / dt * kernels::pairwise_sum(w.diff2);
    }

    std::swap(u, w.newu);
    t += dt;
    ++tr.steps_accepted;
    if (cfg.record_steps) {
      tr.step_states.push_back(u);
      tr.step_dts.push_back(dt);
    }

    kernels::cell_gradients(ex, u, dx, w.cellg);
    const double sup = kernels::max_abs(ex, w.cellg);

    if (cfg.blowup_grad_threshold > 0.0 && sup >= cfg.blowup_grad_threshold && !tr.t_star) {
      if (have_prev) {
        const double frac =
            (cfg.blowup_grad_threshold - sup_last) / std::max(sup - sup_last, 1e-300);
        tr.t_star = t_last + frac * (t - t_last);
      } else {
        tr.t_star = t;
      }
      std::size_t arg = 0;
      for (std::size_t i = 1; i < w.cellg.size(); ++i)
        if (std::abs(w.cellg[i]) > std::abs(w.cellg[arg])) arg = i;
      tr.blow_side = (arg <= n / 2) ? 0 : 1;
      tr.grad_at_stop = sup;
      tr.status = SolveStatus::threshold_crossed;
      take_snapshot(last_max_ut, last_sup_abs_ut, dt);
      return tr;
    }

    t_last = t;
    sup_last = sup;
    have_prev = true;
    tr.grad_series.push_back({t, sup});

    if (t >= next_snap - 1e-12) {
      take_snapshot(last_max_ut, last_sup_abs_ut, dt);
      next_snap += cfg.snapshot_dt;
    }

    if (du <= cfg.du_max) {
      if (++grow >= 20) {
        dt = std::min(dt * 1.2, cfg.dt_max);
        grow = 0;
      }
    }

    if (cfg.early_stop_ut > 0.0 && last_sup_abs_ut < cfg.early_stop_ut &&
        t > cfg.early_stop_t_min) {
      tr.status = SolveStatus::early_stopped;
      take_snapshot(last_max_ut, last_sup_abs_ut, dt);
      return tr;
    }
  }

  tr.status = SolveStatus::reached_t_end;
  take_snapshot(last_max_ut, last_sup_abs_ut, dt);
  return tr;
}

BlowupCertificate certify_blowup(const ProblemParams& prm, const SolveConfig& cfg,
                                 const std::function<std::vector<double>(std::size_t)>& u0_of_n) {
  if (!(cfg.blowup_grad_threshold > 0.0))
    throw RangeError("certify_blowup: needs a positive gradient threshold");

  BlowupCertificate cert;
  cert.rel_shift_dx = kInf;
  cert.rel_shift_dt = kInf;

  const Trajectory base = solve(prm, u0_of_n(cfg.n), cfg);
  if (!base.t_star) throw RangeError("certify_blowup: base run never crosses the threshold");
  cert.t_star_base = *base.t_star;

  SolveConfig fine_dx = cfg;
  fine_dx.n = 2 * cfg.n + 1;
  const Trajectory rdx = solve(prm, u0_of_n(fine_dx.n), fine_dx);
  if (rdx.t_star) {
    cert.t_star_dx2 = rdx.t_star;
    cert.rel_shift_dx = std::abs(*rdx.t_star - cert.t_star_base) / cert.t_star_base;
  }

  SolveConfig fine_dt = cfg;
  fine_dt.dt_init *= 0.5;
  fine_dt.dt_max *= 0.5;
  fine_dt.du_max *= 0.5;
  const Trajectory rdt = solve(prm, u0_of_n(cfg.n), fine_dt);
  if (rdt.t_star) {
    cert.t_star_dt2 = rdt.t_star;
    cert.rel_shift_dt = std::abs(*rdt.t_star - cert.t_star_base) / cert.t_star_base;
  }
  return cert;
}

ContinuationReport eps_continuation(ProblemParams prm, const std::vector<double>& u0,
                                    const SolveConfig& cfg, const std::vector<double>& eps_levels,
                                    double cauchy_tol, bool strict) {
  if (eps_levels.size() < 3)
    throw RangeError("eps_continuation: need at least three eps levels");
  const double cap = epsilon_bound(prm.p, prm.q);
  for (std::size_t i = 0; i < eps_levels.size(); ++i) {
    if (!(eps_levels[i] > 0.0) || !(eps_levels[i] < cap))
      throw RangeError("eps_continuation: eps level outside the admissible window");
    if (i > 0 && !(eps_levels[i] < eps_levels[i - 1]))
      throw RangeError("eps_continuation: eps levels must decrease strictly");
  }

  ContinuationReport rep;
  rep.eps_levels = eps_levels;

  std::vector<Trajectory> runs;
  runs.reserve(eps_levels.size());
  const double dx = 1.0 / static_cast<double>(cfg.n + 1);
  std::vector<double> cellg(cfg.n + 1);
  for (double e : eps_levels) {
    prm.eps = e;
    runs.push_back(solve(prm, u0, cfg));
    double supg = 0.0;
    for (const auto& snap : runs.back().snapshots) {
      kernels::cell_gradients(cfg.exec, snap.u, dx, cellg);
      supg = std::max(supg, kernels::max_abs(cfg.exec, cellg));
    }
    rep.sup_gradients.push_back(supg);
    rep.udot_sq_integrals.push_back(runs.back().udot_sq_integral);
  }

  for (std::size_t j = 1; j < runs.size(); ++j) {
    const auto& a = runs[j - 1].snapshots;
    const auto& b = runs[j].snapshots;
    const std::size_t m = std::min(a.size(), b.size());
    double d = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t kk = 0; kk < a[i].u.size(); ++kk)
        d = std::max(d, std::abs(a[i].u[kk] - b[i].u[kk]));
    }
    rep.distances.push_back(d);
  }

  rep.cauchy_ok = true;
  for (std::size_t j = 1; j < rep.distances.size(); ++j) {
    const bool ok = rep.distances[j] < rep.distances[j - 1] ||
                    (cauchy_tol > 0.0 && rep.distances[j] <= cauchy_tol);
    if (!ok) rep.cauchy_ok = false;
  }
  if (strict && !rep.cauchy_ok)
    throw ConvergenceError("eps_continuation: level distances are not Cauchy");
  return rep;
}

}  // namespace dhj
