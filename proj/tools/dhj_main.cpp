// dhj: a numerical laboratory for the boundary value problem
//
//   u_t = (|u_x|^{p-2} u_x)_x + |u_x|^q   on (0,1),
//   u(t,0) = 0,  u(t,1) = M,   q > p > 2,
//
// covering the steady family, the regularized time integration, the
// Lyapunov machinery and the convergence/blow-up classification.
//
// Exit codes of `run` (and `report`): 0 converged to a steady profile,
// 2 certified gradient blow-up, 3 undetermined, 1 error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dhj/config.hpp"
#include "dhj/errors.hpp"
#include "dhj/lyapunov.hpp"
#include "dhj/params.hpp"
#include "dhj/runner.hpp"
#include "dhj/steady.hpp"

namespace {

using dhj::Outcome;

int outcome_exit(Outcome::Kind k) {
  switch (k) {
    case Outcome::Kind::converged: return 0;
    case Outcome::Kind::gradient_blowup: return 2;
    case Outcome::Kind::undetermined: return 3;
  }
  return 1;
}

std::string outcome_line(const Outcome& o) {
  char buf[256];
  switch (o.kind) {
    case Outcome::Kind::converged:
      std::snprintf(buf, sizeof buf, "Converged  k = %.12g  sup-dist = %.3g  C1-dist = %.3g", o.k,
                    o.distance, o.c1_distance);
      break;
    case Outcome::Kind::gradient_blowup:
      std::snprintf(buf, sizeof buf, "GradientBlowUp  t* = %.6g  side = %s", o.t_star,
                    o.side == 0 ? "left" : "right");
      break;
    case Outcome::Kind::undetermined:
      std::snprintf(buf, sizeof buf, "Undetermined  (%s)", o.reason.c_str());
      break;
  }
  return buf;
}

// Shared flag set layered over a (possibly file-loaded) config; every flag
// stays optional so the precedence is flag > file > default.
struct Overrides {
  std::optional<double> p, q, M, eps, K;
  std::optional<std::size_t> n;
  std::optional<std::string> stepper, exec;
  std::optional<double> dt_init, dt_max, du_max, cfl_safety;
  std::optional<double> t_end, threshold, snapshot_dt, early_stop_ut, early_stop_t_min;
  std::optional<std::string> out_dir;

  void add_to(CLI::App* cmd, bool with_mass) {
    cmd->add_option("-p,--exponent-p", p, "diffusion exponent (p > 2)");
    cmd->add_option("-q,--exponent-q", q, "source exponent (q > p)");
    if (with_mass) cmd->add_option("-M,--mass", M, "boundary mass u(t,1)");
    cmd->add_option("--eps", eps, "gradient regularization strength");
    cmd->add_option("-K", K, "Lyapunov domain bound (0 = automatic)");
    cmd->add_option("-n,--nodes", n, "interior grid nodes");
    cmd->add_option("--stepper", stepper, "semi_implicit | explicit_euler")
        ->check(CLI::IsMember({"semi_implicit", "explicit_euler"}));
    cmd->add_option("--exec", exec, "kernel execution: openmp | serial")
        ->check(CLI::IsMember({"openmp", "serial"}));
    cmd->add_option("--dt-init", dt_init, "initial time step");
    cmd->add_option("--dt-max", dt_max, "time step ceiling");
    cmd->add_option("--du-max", du_max, "per-step update cap");
    cmd->add_option("--cfl-safety", cfl_safety, "explicit stepper CFL factor");
    cmd->add_option("--t-end", t_end, "integration horizon");
    cmd->add_option("--threshold", threshold, "gradient threshold that stops the run");
    cmd->add_option("--snapshot-dt", snapshot_dt, "snapshot cadence");
    cmd->add_option("--early-stop-ut", early_stop_ut, "stop once sup|u_t| is below this");
    cmd->add_option("--early-stop-t-min", early_stop_t_min, "earliest early-stop time");
    cmd->add_option("-o,--out", out_dir, "output directory");
  }

  void apply(dhj::ExperimentConfig& cfg) const {
    if (p) cfg.params.p = *p;
    if (q) cfg.params.q = *q;
    if (M) cfg.params.M = *M;
    if (eps) cfg.params.eps = *eps;
    if (K) cfg.params.K = *K;
    if (n) cfg.solve.n = *n;
    if (stepper)
      cfg.solve.stepper =
          *stepper == "semi_implicit" ? dhj::Stepper::semi_implicit : dhj::Stepper::explicit_euler;
    if (exec) {
      const auto e = *exec == "openmp" ? dhj::kernels::Exec::openmp : dhj::kernels::Exec::serial;
      cfg.solve.exec = e;
      cfg.monitor.exec = e;
    }
    if (dt_init) cfg.solve.dt_init = *dt_init;
    if (dt_max) cfg.solve.dt_max = *dt_max;
    if (du_max) cfg.solve.du_max = *du_max;
    if (cfl_safety) cfg.solve.cfl_safety = *cfl_safety;
    if (t_end) cfg.solve.t_end = *t_end;
    if (threshold) cfg.solve.blowup_grad_threshold = *threshold;
    if (snapshot_dt) cfg.solve.snapshot_dt = *snapshot_dt;
    if (early_stop_ut) cfg.solve.early_stop_ut = *early_stop_ut;
    if (early_stop_t_min) cfg.solve.early_stop_t_min = *early_stop_t_min;
    if (out_dir) cfg.output.directory = *out_dir;
  }
};

dhj::ExperimentConfig base_config(const std::string& config_path, const Overrides& ov) {
  dhj::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = dhj::load_config_file(config_path);
  ov.apply(cfg);
  return cfg;
}

void print_checks(const dhj::RunResult& r) {
  for (const auto& c : r.checks)
    std::printf("  %-14s %-4s worst = %+.3e  checked = %zu  violations = %zu\n", c.name.c_str(),
                c.ok() ? "ok" : "FAIL", c.worst, c.checked, c.violations.size());
}

int cmd_run(const std::string& config_path, const Overrides& ov, bool no_output, bool as_json) {
  dhj::ExperimentConfig cfg = base_config(config_path, ov);
  dhj::RunResult r = dhj::run_experiment(std::move(cfg), !no_output);
  if (as_json) {
    std::cout << dhj::report_json_text(r);
  } else {
    std::printf("p = %g  q = %g  M = %.12g  eps = %g  K = %g\n", r.cfg.params.p, r.cfg.params.q,
                r.cfg.params.M, r.cfg.params.eps, r.cfg.params.K);
    std::printf("m_b = %.12g  alpha = %.12g\n", r.derived.m_b, r.derived.alpha);
    std::printf("status = %s  steps = %zu (+%zu rejected)  t_final = %.6g\n",
                dhj::to_string(r.traj.status), r.traj.steps_accepted, r.traj.steps_rejected,
                r.traj.snapshots.back().t);
    if (r.cert)
      std::printf("certificate: dx/2 shift = %.3g  dt/2 shift = %.3g  stable = %s\n",
                  r.cert->rel_shift_dx, r.cert->rel_shift_dt, r.cert->stable() ? "yes" : "no");
    print_checks(r);
    std::printf("outcome: %s\n", outcome_line(r.outcome).c_str());
    if (!r.artifacts.dir.empty()) std::printf("artifacts: %s\n", r.artifacts.dir.c_str());
  }
  return outcome_exit(r.outcome.kind);
}

int cmd_sweep(const std::string& config_path, const Overrides& ov, std::vector<double> masses,
              double from, double to, std::size_t count, int jobs, bool no_output) {
  dhj::ExperimentConfig cfg = base_config(config_path, ov);
  if (masses.empty()) {
    if (!(count >= 2)) throw dhj::RangeError("sweep: need --count >= 2 (or explicit --masses)");
    for (std::size_t i = 0; i < count; ++i)
      masses.push_back(from + (to - from) * static_cast<double>(i) /
                                  static_cast<double>(count - 1));
  }
  dhj::SweepResult sw = dhj::run_sweep(cfg, masses, jobs, !no_output);
  for (const auto& rec : sw.records)
    std::printf("M = %-10.6g -> %s\n", rec.M, outcome_line(rec.outcome).c_str());
  std::printf("m_b = %.12g\n", sw.m_b);
  if (sw.m_hat)
    std::printf("m_hat = %.12g (flip midpoint)\n", *sw.m_hat);
  else
    std::printf("m_hat = undetermined (no clean classification flip)\n");
  if (!sw.index_path.empty()) std::printf("index: %s\n", sw.index_path.c_str());
  return 0;
}

int cmd_steady(double p, double q, double M, int grid, const std::string& csv_path) {
  const double m_b = dhj::critical_mass(p, q);
  std::printf("m_b = %.12g  alpha = %.12g\n", m_b, dhj::alpha_exponent(p, q));
  auto s = dhj::solve_k(M, p, q);
  if (!s) {
    std::printf("no steady state: M = %.12g exceeds m_b\n", M);
    return 3;
  }
  std::printf("k = %.12g  mass = %.12g  zero = %s\n", s->k, s->mass, s->zero ? "yes" : "no");
  if (grid >= 16) std::printf("residual(grid = %d) = %.3e\n", grid, dhj::residual(*s, grid));

  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw dhj::ConfigError("cannot open output file: " + csv_path);
    out << "# schema=dhj.steady.v1\n";
    out << "x,V,dV,flux\n";
    const int nsamp = std::max(grid, 16);
    char buf[160];
    for (int i = 0; i <= nsamp; ++i) {
      const double x = static_cast<double>(i) / nsamp;
      double dv = std::numeric_limits<double>::infinity();
      double fl = std::numeric_limits<double>::infinity();
      try {
        dv = s->derivative(x);
        fl = s->flux(x);
      } catch (const dhj::SingularityError&) {
        // k = 0 profile: the slope diverges at x = 0
      }
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", x, s->value(x), dv, fl);
      out << buf;
    }
    std::printf("profile: %s\n", csv_path.c_str());
  }
  return 0;
}

int cmd_lyapunov_check(double p, double q, double eps, double K, double h_eqdif, double h_tou,
                       double tol_eqdif, double tol_tou, const std::string& exec) {
  dhj::ProblemParams prm;
  prm.p = p;
  prm.q = q;
  prm.eps = eps;
  prm.K = K;
  const auto ex =
      exec == "serial" ? dhj::kernels::Exec::serial : dhj::kernels::Exec::openmp;
  const dhj::LyapunovEvaluator lyap(prm);

  dhj::CheckGrid ge;
  ge.h = h_eqdif;
  const dhj::ResidualScan eqdif = lyap.check_eqdif(ge, ex);

  dhj::CheckGrid gt;
  gt.v_lo = 0.1;
  gt.h = h_tou;
  const dhj::ResidualScan tou = lyap.check_tou(gt, ex);

  nlohmann::json j;
  j["params"] = {{"p", p}, {"q", q}, {"eps", eps}, {"K", K}};
  j["eqdif"] = {{"max_abs", eqdif.max_abs}, {"arg_u", eqdif.arg_u}, {"arg_v", eqdif.arg_v},
                {"h", h_eqdif},             {"tol", tol_eqdif},     {"ok", eqdif.max_abs <= tol_eqdif}};
  j["tou"] = {{"max_abs", tou.max_abs}, {"arg_u", tou.arg_u}, {"arg_v", tou.arg_v},
              {"h", h_tou},             {"tol", tol_tou},     {"ok", tou.max_abs <= tol_tou}};
  std::cout << j.dump(2) << "\n";
  return (eqdif.max_abs <= tol_eqdif && tou.max_abs <= tol_tou) ? 0 : 1;
}

int cmd_report(const std::string& target) {
  namespace fs = std::filesystem;
  fs::path path(target);
  if (fs::is_directory(path)) path /= "report.json";
  std::ifstream in(path);
  if (!in) throw dhj::ConfigError("cannot open report: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw dhj::ConfigError(std::string("malformed report: ") + e.what());
  }

  const auto& prm = j.at("params");
  std::printf("p = %g  q = %g  M = %.12g  eps = %g\n", prm.at("p").get<double>(),
              prm.at("q").get<double>(), prm.at("M").get<double>(), prm.at("eps").get<double>());
  std::printf("m_b = %.12g\n", j.at("derived").at("m_b").get<double>());
  std::printf("status = %s  t_final = %.6g\n", j.at("status").get<std::string>().c_str(),
              j.at("t_final").get<double>());
  for (const auto& c : j.at("checks")) {
    const auto& w = c.at("worst");  // null marks a vacuous check
    std::printf("  %-14s %-4s worst = %+.3e  violations = %zu\n",
                c.at("name").get<std::string>().c_str(), c.at("ok").get<bool>() ? "ok" : "FAIL",
                w.is_number() ? w.get<double>() : -std::numeric_limits<double>::infinity(),
                c.at("violations").size());
  }

  const auto& o = j.at("outcome");
  const std::string kind = o.at("kind").get<std::string>();
  Outcome out;
  if (kind == "Converged") {
    out.kind = Outcome::Kind::converged;
    out.k = o.at("k").get<double>();
    out.distance = o.at("distance").get<double>();
    out.c1_distance = o.at("c1_distance").get<double>();
  } else if (kind == "GradientBlowUp") {
    out.kind = Outcome::Kind::gradient_blowup;
    out.t_star = o.at("t_star").get<double>();
    out.side = o.at("side").get<int>();
  } else {
    out.kind = Outcome::Kind::undetermined;
    out.reason = o.value("reason", std::string("unspecified"));
  }
  std::printf("outcome: %s\n", outcome_line(out).c_str());
  return outcome_exit(out.kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dhj — degenerate diffusive Hamilton-Jacobi laboratory:\n"
      "  u_t = (|u_x|^{p-2} u_x)_x + |u_x|^q on (0,1), u(t,0) = 0, u(t,1) = M, q > p > 2"};
  app.require_subcommand(1);

  // run ---------------------------------------------------------------
  std::string run_config;
  Overrides run_ov;
  bool run_no_output = false, run_json = false;
  CLI::App* run = app.add_subcommand("run", "integrate one configuration and classify it");
  run->add_option("-c,--config", run_config, "JSON config file")->check(CLI::ExistingFile);
  run_ov.add_to(run, /*with_mass=*/true);
  run->add_flag("--no-output", run_no_output, "skip writing artifacts");
  run->add_flag("--json", run_json, "print the full report JSON to stdout");

  // sweep -------------------------------------------------------------
  std::string sweep_config;
  Overrides sweep_ov;
  std::vector<double> sweep_masses;
  double sweep_from = 0.5, sweep_to = 3.5;
  std::size_t sweep_count = 13;
  int sweep_jobs = 1;
  bool sweep_no_output = false;
  CLI::App* sweep = app.add_subcommand("sweep", "classify a range of boundary masses");
  sweep->add_option("-c,--config", sweep_config, "JSON config file")->check(CLI::ExistingFile);
  sweep_ov.add_to(sweep, /*with_mass=*/false);
  sweep->add_option("--masses", sweep_masses, "explicit mass list (overrides from/to/count)");
  sweep->add_option("--from", sweep_from, "first mass of the uniform sweep");
  sweep->add_option("--to", sweep_to, "last mass of the uniform sweep");
  sweep->add_option("--count", sweep_count, "number of uniform sweep points");
  sweep->add_option("-j,--jobs", sweep_jobs, "parallel sweep workers")
      ->check(CLI::Range(1, 256));
  sweep->add_flag("--no-output", sweep_no_output, "skip writing artifacts");

  // steady ------------------------------------------------------------
  double st_p = 3.0, st_q = 4.0, st_M = 1.0;
  int st_grid = 256;
  std::string st_csv;
  CLI::App* steady = app.add_subcommand("steady", "steady-profile family V_k and critical mass");
  steady->add_option("-p,--exponent-p", st_p, "diffusion exponent (p > 2)");
  steady->add_option("-q,--exponent-q", st_q, "source exponent (q > p)");
  steady->add_option("-M,--mass", st_M, "boundary mass to match");
  steady->add_option("--grid", st_grid, "residual/profile sample intervals (>= 16)");
  steady->add_option("--csv", st_csv, "write the sampled profile to this CSV file");

  // lyapunov-check ------------------------------------------------------
  double lc_p = 3.0, lc_q = 4.0, lc_eps = 0.25, lc_K = 2.0;
  double lc_h_eqdif = 1e-3, lc_h_tou = 1e-4, lc_tol_eqdif = 1e-4, lc_tol_tou = 1e-5;
  std::string lc_exec = "openmp";
  CLI::App* lc = app.add_subcommand(
      "lyapunov-check", "residual scan of the structural identities behind the Lyapunov function");
  lc->add_option("-p,--exponent-p", lc_p, "diffusion exponent (p > 2)");
  lc->add_option("-q,--exponent-q", lc_q, "source exponent (q > p)");
  lc->add_option("--eps", lc_eps, "regularization strength");
  lc->add_option("-K", lc_K, "domain bound (grid must stay inside |u| <= K - h)");
  lc->add_option("--h-eqdif", lc_h_eqdif, "centered-difference step, density identity");
  lc->add_option("--h-tou", lc_h_tou, "centered-difference step, generator identity");
  lc->add_option("--tol-eqdif", lc_tol_eqdif, "pass tolerance, density identity");
  lc->add_option("--tol-tou", lc_tol_tou, "pass tolerance, generator identity");
  lc->add_option("--exec", lc_exec, "kernel execution: openmp | serial")
      ->check(CLI::IsMember({"openmp", "serial"}));

  // report --------------------------------------------------------------
  std::string rp_target;
  CLI::App* report = app.add_subcommand("report", "summarize a finished run directory");
  report->add_option("target", rp_target, "run directory or report.json path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run->parsed()) return cmd_run(run_config, run_ov, run_no_output, run_json);
    if (sweep->parsed())
      return cmd_sweep(sweep_config, sweep_ov, sweep_masses, sweep_from, sweep_to, sweep_count,
                       sweep_jobs, sweep_no_output);
    if (steady->parsed()) return cmd_steady(st_p, st_q, st_M, st_grid, st_csv);
    if (lc->parsed())
      return cmd_lyapunov_check(lc_p, lc_q, lc_eps, lc_K, lc_h_eqdif, lc_h_tou, lc_tol_eqdif,
                                lc_tol_tou, lc_exec);
    if (report->parsed()) return cmd_report(rp_target);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
