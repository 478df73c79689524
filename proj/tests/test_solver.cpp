#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "dhj/errors.hpp"
#include "dhj/params.hpp"
#include "dhj/solver.hpp"
#include "dhj/steady.hpp"

using namespace dhj;

namespace {

std::vector<double> linear_u0(std::size_t n, double M) {
  std::vector<double> u(n + 2);
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = M * static_cast<double>(i) / static_cast<double>(n + 1);
  return u;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("one explicit step from a linear ramp reproduces the hand formula") {
  // dx = 1/32 keeps every node value exact in binary floating point, so the
  // centered gradient is exactly 1 and the Laplacian exactly 0: the update is
  // u += dt (g^2+eps^2)^{q/2} everywhere in the interior.
  ProblemParams prm;
  prm.M = 1.0;
  prm.eps = 0.25;
  SolveConfig cfg;
  cfg.n = 31;
  cfg.stepper = Stepper::explicit_euler;
  cfg.dt_init = 1e-6;
  cfg.t_end = 1e-6;  // exactly one step
  cfg.snapshot_dt = 1.0;
  const auto u0 = linear_u0(cfg.n, prm.M);
  const Trajectory tr = solve(prm, u0, cfg);
  CHECK(tr.steps_accepted == 1);
  CHECK(tr.steps_rejected == 0);
  CHECK(tr.status == SolveStatus::reached_t_end);
  REQUIRE(tr.snapshots.size() == 2);

  const double w = 1.0 * 1.0 + prm.eps * prm.eps;
  const double r = std::pow(w, 0.5 * prm.q);  // diffusion term vanishes exactly
  const auto& uf = tr.final_state().u;
  CHECK(uf.front() == 0.0);
  CHECK(uf.back() == prm.M);
  for (std::size_t i = 1; i + 1 < uf.size(); ++i)
    CHECK(uf[i] == doctest::Approx(u0[i] + cfg.dt_init * r).epsilon(1e-15));

  // Int u_t^2 dx over the single step: dx * dt * n * r^2.
  const double dx = 1.0 / static_cast<double>(cfg.n + 1);
  CHECK(tr.udot_sq_integral ==
        doctest::Approx(dx * cfg.dt_init * static_cast<double>(cfg.n) * r * r).epsilon(1e-12));
}

TEST_CASE("one tiny semi-implicit step from a linear ramp is the frozen-source update") {
  ProblemParams prm;
  prm.M = 1.0;
  prm.eps = 0.25;
  SolveConfig cfg;
  cfg.n = 31;
  cfg.dt_init = 1e-8;
  cfg.t_end = 1e-8;
  cfg.snapshot_dt = 1.0;
  const auto u0 = linear_u0(cfg.n, prm.M);
  const Trajectory tr = solve(prm, u0, cfg);
  CHECK(tr.steps_accepted == 1);
  const double S = std::pow(1.0 + prm.eps * prm.eps, 0.5 * prm.q);
  const auto& uf = tr.final_state().u;
  // The implicit diffusion correction is O(dt^2/dx^2) ~ 1e-11 here.
  for (std::size_t i = 1; i + 1 < uf.size(); ++i)
    CHECK(std::abs(uf[i] - (u0[i] + cfg.dt_init * S)) < 1e-11);
}

TEST_CASE("the steady profile barely moves under the flow") {
  ProblemParams prm;
  prm.M = 1.0;
  prm.eps = 1e-6;  // essentially the unregularized equation
  auto s = solve_k(1.0, 3.0, 4.0);
  REQUIRE(s.has_value());
  SolveConfig cfg;
  cfg.n = 256;
  cfg.t_end = 0.01;
  cfg.snapshot_dt = 0.01;
  std::vector<double> u0(cfg.n + 2);
  const double dx = 1.0 / static_cast<double>(cfg.n + 1);
  for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = s->value(static_cast<double>(i) * dx);
  u0.front() = 0.0;
  u0.back() = prm.M;
  const Trajectory tr = solve(prm, u0, cfg);
  CHECK(sup_diff(tr.final_state().u, u0) < 1e-6);  // measured ~2e-8
}

TEST_CASE("zero boundary data stays at machine zero") {
  ProblemParams prm;
  prm.M = 0.0;
  prm.eps = 1e-4;
  SolveConfig cfg;
  cfg.n = 32;
  cfg.t_end = 0.5;
  cfg.snapshot_dt = 0.1;
  const Trajectory tr = solve(prm, std::vector<double>(cfg.n + 2, 0.0), cfg);
  for (const double v : tr.final_state().u) {
    CHECK(v >= 0.0);      // the source only pushes upward
    CHECK(v <= 1e-12);    // eps^q t ~ 1e-16
  }
}

TEST_CASE("snapshot cadence and bookkeeping") {
  ProblemParams prm;
  prm.M = 1.0;
  prm.eps = 0.1;
  SolveConfig cfg;
  cfg.n = 32;
  cfg.t_end = 0.3;
  cfg.snapshot_dt = 0.1;
  const Trajectory tr = solve(prm, linear_u0(cfg.n, prm.M), cfg);
  CHECK(tr.status == SolveStatus::reached_t_end);
  REQUIRE(tr.snapshots.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(std::abs(tr.snapshots[i].t - 0.1 * static_cast<double>(i)) < 1e-9);
  CHECK(tr.final_state().u.size() == cfg.n + 2);
  REQUIRE(!tr.grad_series.empty());
  for (std::size_t i = 1; i < tr.grad_series.size(); ++i)
    CHECK(tr.grad_series[i].t > tr.grad_series[i - 1].t);
  CHECK(tr.steps_accepted == tr.grad_series.size());
}

TEST_CASE("repeat calls and both execution modes are bitwise identical") {
  ProblemParams prm;
  prm.M = 3.0;
  prm.eps = 0.05;
  SolveConfig cfg;
  cfg.n = 64;
  cfg.t_end = 2.0;
  cfg.blowup_grad_threshold = 20.0;
  cfg.snapshot_dt = 0.05;
  const auto u0 = linear_u0(cfg.n, prm.M);

  const Trajectory a = solve(prm, u0, cfg);
  const Trajectory b = solve(prm, u0, cfg);
  SolveConfig scfg = cfg;
  scfg.exec = kernels::Exec::serial;
  const Trajectory c = solve(prm, u0, scfg);

  REQUIRE(a.status == SolveStatus::threshold_crossed);
  REQUIRE(a.t_star.has_value());
  CHECK(a.blow_side == 0);  // steep side is the left boundary
  CHECK(*a.t_star > 0.0);
  CHECK(a.grad_at_stop >= cfg.blowup_grad_threshold);

  for (const Trajectory* other : {&b, &c}) {
    REQUIRE(other->t_star.has_value());
    CHECK(*other->t_star == *a.t_star);
    CHECK(other->steps_accepted == a.steps_accepted);
    CHECK(other->udot_sq_integral == a.udot_sq_integral);
    const auto& ua = a.final_state().u;
    const auto& ub = other->final_state().u;
    REQUIRE(ua.size() == ub.size());
    CHECK(std::memcmp(ua.data(), ub.data(), ua.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("stopping early and restarting lands close to the uninterrupted run") {
  ProblemParams prm;
  prm.M = 1.0;
  prm.eps = 0.1;
  SolveConfig cfg;
  cfg.n = 64;
  cfg.t_end = 0.3;
  cfg.snapshot_dt = 0.05;
  const auto u0 = linear_u0(cfg.n, prm.M);
  const Trajectory full = solve(prm, u0, cfg);

  SolveConfig first = cfg;
  first.t_end = 0.15;
  const Trajectory head = solve(prm, u0, first);
  CHECK(std::abs(head.final_state().t - 0.15) < 1e-12);
  const Trajectory tail = solve(prm, head.final_state().u, cfg, head.final_state().t);

  CHECK(std::abs(tail.final_state().t - full.final_state().t) < 1e-12);
  // The dt sequences differ, so the states agree only up to time-stepping
  // error; measured ~1.6e-7 at these settings.
  CHECK(sup_diff(tail.final_state().u, full.final_state().u) < 1e-5);
}

TEST_CASE("reflection symmetry is preserved bit for bit by the explicit stepper") {
  // With M = 0 the problem is invariant under x -> 1-x. The stencils are
  // written so that a bitwise-symmetric state stays bitwise symmetric.
  ProblemParams prm;
  prm.M = 0.0;
  prm.eps = 0.01;
  SolveConfig cfg;
  cfg.n = 31;  // dx = 1/32: node positions are exact binary fractions
  cfg.stepper = Stepper::explicit_euler;
  cfg.t_end = 0.02;
  cfg.dt_max = 1e-4;
  cfg.snapshot_dt = 0.01;
  const std::size_t nn = cfg.n + 2;
  std::vector<double> u0(nn);
  const double dx = 1.0 / static_cast<double>(cfg.n + 1);
  for (std::size_t i = 0; i < nn; ++i) {
    const double x = static_cast<double>(i) * dx;
    u0[i] = 0.5 * x * (1.0 - x);
  }
  for (std::size_t i = 0; i < nn; ++i) REQUIRE(u0[i] == u0[nn - 1 - i]);

  const Trajectory tr = solve(prm, u0, cfg);
  CHECK(tr.status == SolveStatus::reached_t_end);
  const auto& uf = tr.final_state().u;
  for (std::size_t i = 0; i < nn; ++i) CHECK(uf[i] == uf[nn - 1 - i]);
  CHECK(kernels::max_abs(kernels::Exec::serial, uf) > 0.0);  // not the trivial state
}

TEST_CASE("manufactured steady solution: the scheme is second order in space") {
  // Adding the forcing that makes u*(x) = x + sin(pi x)/2 stationary, the
  // solver relaxes to the discrete steady state; its distance to u* on the
  // nodes must shrink like dx^2 (the fixed point does not depend on dt).
  ProblemParams prm;
  prm.M = 1.0;
  prm.eps = 0.1;
  const double p = prm.p, q = prm.q, eps = prm.eps;
  auto ustar = [](double x) { return x + 0.5 * std::sin(M_PI * x); };
  auto force = [p, q, eps](double x, double) {
    const double ux = 1.0 + 0.5 * M_PI * std::cos(M_PI * x);
    const double uxx = -0.5 * M_PI * M_PI * std::sin(M_PI * x);
    const double w = ux * ux + eps * eps;
    return -((p - 1.0) * std::pow(w, 0.5 * (p - 2.0)) * uxx + std::pow(w, 0.5 * q));
  };

  std::vector<double> errs;
  for (std::size_t n : {49u, 99u, 199u}) {  // dx halves exactly between levels
    SolveConfig cfg;
    cfg.n = n;
    cfg.t_end = 20.0;
    cfg.snapshot_dt = 1.0;
    cfg.early_stop_ut = 1e-10;
    cfg.early_stop_t_min = 0.5;
    cfg.forcing = force;
    const double dx = 1.0 / static_cast<double>(n + 1);
    std::vector<double> u0(n + 2);
    for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = ustar(static_cast<double>(i) * dx);
    u0.front() = 0.0;
    u0.back() = prm.M;
    const Trajectory tr = solve(prm, u0, cfg);
    CHECK(tr.status == SolveStatus::early_stopped);
    double err = 0.0;
    for (std::size_t i = 0; i < u0.size(); ++i)
      err = std::max(err, std::abs(tr.final_state().u[i] - ustar(static_cast<double>(i) * dx)));
    errs.push_back(err);
  }
  const double order1 = std::log2(errs[0] / errs[1]);
  const double order2 = std::log2(errs[1] / errs[2]);
  CHECK(order1 > 1.8);  // measured 2.01
  CHECK(order1 < 2.3);
  CHECK(order2 > 1.8);  // measured 2.00
  CHECK(order2 < 2.3);
}

TEST_CASE("blow-up certificate: refinement in dx and dt keeps the crossing time") {
  ProblemParams prm;
  prm.M = 3.0;
  prm.eps = 0.05;
  SolveConfig cfg;
  cfg.n = 160;
  cfg.t_end = 2.0;
  cfg.blowup_grad_threshold = 20.0;
  cfg.snapshot_dt = 0.05;
  const BlowupCertificate cert =
      certify_blowup(prm, cfg, [](std::size_t n) { return linear_u0(n, 3.0); });
  CHECK(cert.t_star_base > 0.003);
  CHECK(cert.t_star_base < 0.006);
  CHECK(cert.stable(0.10));  // measured: dx shift 6.8%, dt shift 0.6%
  CHECK(cert.rel_shift_dt < 0.02);

  // A run that never crosses the threshold cannot be certified.
  ProblemParams sub = prm;
  sub.M = 1.0;
  SolveConfig short_cfg = cfg;
  short_cfg.n = 48;
  short_cfg.t_end = 0.1;
  CHECK_THROWS_AS(certify_blowup(sub, short_cfg, [](std::size_t n) { return linear_u0(n, 1.0); }),
                  RangeError);
  SolveConfig no_thr = cfg;
  no_thr.blowup_grad_threshold = 0.0;
  CHECK_THROWS_AS(certify_blowup(prm, no_thr, [](std::size_t n) { return linear_u0(n, 3.0); }),
                  RangeError);
}

TEST_CASE("both steppers agree on the crossing time") {
  ProblemParams prm;
  prm.M = 3.0;
  prm.eps = 0.05;
  SolveConfig cfg;
  cfg.n = 64;
  cfg.t_end = 2.0;
  cfg.blowup_grad_threshold = 20.0;
  cfg.snapshot_dt = 0.05;
  const Trajectory si = solve(prm, linear_u0(cfg.n, prm.M), cfg);
  SolveConfig ecfg = cfg;
  ecfg.stepper = Stepper::explicit_euler;
  const Trajectory ee = solve(prm, linear_u0(cfg.n, prm.M), ecfg);
  REQUIRE(si.t_star.has_value());
  REQUIRE(ee.t_star.has_value());
  CHECK(std::abs(*si.t_star - *ee.t_star) / *si.t_star < 0.05);  // measured 0.6%
  CHECK(si.blow_side == ee.blow_side);
}

TEST_CASE("the accumulated dissipation integral is stable under dt halving") {
  ProblemParams prm;
  prm.M = 1.0;
  prm.eps = 0.1;
  SolveConfig cfg;
  cfg.n = 64;
  cfg.t_end = 0.5;
  cfg.snapshot_dt = 0.1;
  const auto u0 = linear_u0(cfg.n, prm.M);
  const Trajectory a = solve(prm, u0, cfg);
  SolveConfig h = cfg;
  h.dt_init *= 0.5;
  h.dt_max *= 0.5;
  h.du_max *= 0.5;
  const Trajectory b = solve(prm, u0, h);
  CHECK(a.udot_sq_integral > 0.0);
  CHECK(std::abs(a.udot_sq_integral - b.udot_sq_integral) / a.udot_sq_integral <
        0.02);  // measured 0.03%
}

TEST_CASE("vanishing regularization: the level runs form a Cauchy ladder") {
  ProblemParams prm;
  prm.M = 1.0;
  prm.eps = 0.2;
  SolveConfig cfg;
  cfg.n = 64;
  cfg.t_end = 0.5;
  cfg.snapshot_dt = 0.1;
  const auto u0 = linear_u0(cfg.n, prm.M);
  const ContinuationReport rep = eps_continuation(prm, u0, cfg, {0.2, 0.1, 0.05});
  REQUIRE(rep.distances.size() == 2);
  CHECK(rep.distances[0] > 1e-4);
  CHECK(rep.distances[1] < rep.distances[0]);  // measured 2.9e-3 -> 7.2e-4
  CHECK(rep.cauchy_ok);
  REQUIRE(rep.sup_gradients.size() == 3);
  for (const double g : rep.sup_gradients) {
    CHECK(g > 0.0);
    CHECK(g < 2.0);  // uniformly bounded across levels; measured ~1.33-1.35
  }
  for (const double w : rep.udot_sq_integrals) CHECK(w > 0.0);

  // Guards on the level list.
  CHECK_THROWS_AS(eps_continuation(prm, u0, cfg, {0.2, 0.1}), RangeError);
  CHECK_THROWS_AS(eps_continuation(prm, u0, cfg, {0.1, 0.2, 0.05}), RangeError);
  CHECK_THROWS_AS(eps_continuation(prm, u0, cfg, {0.45, 0.2, 0.1}), RangeError);
  CHECK_THROWS_AS(eps_continuation(prm, u0, cfg, {0.2, 0.1, 0.0}), RangeError);
}

TEST_CASE("input validation of the solver") {
  ProblemParams prm;
  prm.M = 1.0;
  prm.eps = 0.1;
  SolveConfig cfg;
  cfg.n = 16;
  const auto u0 = linear_u0(cfg.n, prm.M);

  CHECK_THROWS_AS(solve(prm, std::vector<double>(7, 0.0), cfg), RangeError);  // wrong size
  auto bad_pins = u0;
  bad_pins.front() = 0.1;
  CHECK_THROWS_AS(solve(prm, bad_pins, cfg), RangeError);
  bad_pins = u0;
  bad_pins.back() = prm.M + 0.1;
  CHECK_THROWS_AS(solve(prm, bad_pins, cfg), RangeError);

  SolveConfig bad = cfg;
  bad.snapshot_dt = 0.0;
  CHECK_THROWS_AS(solve(prm, u0, bad), RangeError);
  bad = cfg;
  bad.dt_init = 0.0;
  CHECK_THROWS_AS(solve(prm, u0, bad), RangeError);
  bad = cfg;
  bad.du_max = -1.0;
  CHECK_THROWS_AS(solve(prm, u0, bad), RangeError);
  bad = cfg;
  bad.n = 0;
  CHECK_THROWS_AS(solve(prm, std::vector<double>{0.0, 1.0}, bad), RangeError);

  ProblemParams bad_prm = prm;
  bad_prm.eps = 0.0;
  CHECK_THROWS_AS(solve(bad_prm, u0, cfg), RangeError);
  bad_prm = prm;
  bad_prm.q = 2.5;
  CHECK_THROWS_AS(solve(bad_prm, u0, cfg), RangeError);
  bad_prm = prm;
  bad_prm.M = -1.0;
  CHECK_THROWS_AS(solve(bad_prm, std::vector<double>(cfg.n + 2, 0.0), cfg), RangeError);
}

TEST_CASE("failure modes: dt underflow and explicit overflow") {
  ProblemParams prm;
  prm.M = 1.0;
  prm.eps = 0.1;

  // Semi-implicit: an unsatisfiable du budget drives dt below dt_min.
  SolveConfig strangle;
  strangle.n = 16;
  strangle.t_end = 0.1;
  strangle.du_max = 1e-30;
  CHECK_THROWS_AS(solve(prm, linear_u0(strangle.n, prm.M), strangle), ConvergenceError);

  // Explicit: a reckless dt with the CFL guard and du budget disabled
  // leaves the reals within a few steps (the du budget must stay above the
  // escalating increments all the way to overflow, or rejections would
  // drive dt under dt_min first and raise ConvergenceError instead).
  SolveConfig reckless;
  reckless.n = 16;
  reckless.stepper = Stepper::explicit_euler;
  reckless.dt_init = 1.0;
  reckless.dt_max = 10.0;
  reckless.t_end = 100.0;
  reckless.cfl_safety = 1e9;
  reckless.du_max = 1e300;
  reckless.blowup_grad_threshold = 0.0;
  reckless.snapshot_dt = 1000.0;
  CHECK_THROWS_AS(solve(prm, linear_u0(reckless.n, prm.M), reckless), NonFiniteError);
}
