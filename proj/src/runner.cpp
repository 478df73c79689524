#include "dhj/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "dhj/errors.hpp"
#include "dhj/lyapunov.hpp"

namespace dhj {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxViolationsPerCheck = 100;

json outcome_json(const Outcome& o) {
  json j;
  j["kind"] = to_string(o.kind);
  switch (o.kind) {
    case Outcome::Kind::converged:
      j["k"] = o.k;
      j["distance"] = o.distance;
      j["c1_distance"] = o.c1_distance;
      break;
    case Outcome::Kind::gradient_blowup:
      j["t_star"] = o.t_star;
      j["side"] = o.side;
      break;
    case Outcome::Kind::undetermined:
      j["reason"] = o.reason;
      break;
  }
  return j;
}

json check_json(const BoundCheck& c) {
  json v = json::array();
  const std::size_t cap = std::min(c.violations.size(), kMaxViolationsPerCheck);
  for (std::size_t i = 0; i < cap; ++i) {
    const auto& viol = c.violations[i];
    v.push_back({{"bound", viol.bound}, {"t", viol.t}, {"x", viol.x}, {"margin", viol.margin}});
  }
  // worst = -inf marks a vacuous check (no sample in the window); JSON has
  // no inf, so it is carried as null.
  return json{{"name", c.name},
              {"worst", std::isfinite(c.worst) ? json(c.worst) : json(nullptr)},
              {"checked", c.checked},
              {"ok", c.ok()},
              {"violations", std::move(v)}};
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << text;
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace

void write_series_csv(const std::string& path, const ProblemParams& prm, const Trajectory& traj,
                      kernels::Exec ex) {
  const LyapunovEvaluator lyap(prm);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << "# schema=dhj.series.v1\n";
  out << "t,sup_u,min_u,sup_ux,min_ux,lyapunov,sup_ut,dt\n";
  std::vector<double> cellg;
  char buf[256];
  for (const auto& snap : traj.snapshots) {
    const double dx = 1.0 / static_cast<double>(snap.u.size() - 1);
    cellg.resize(snap.u.size() - 1);
    kernels::cell_gradients(ex, snap.u, dx, cellg);
    const double sup_u = kernels::max_value(ex, snap.u);
    const double min_u = kernels::min_value(ex, snap.u);
    const double sup_ux = kernels::max_value(ex, cellg);
    const double min_ux = kernels::min_value(ex, cellg);
    double lval = std::numeric_limits<double>::quiet_NaN();
    try {
      lval = lyap.lyapunov_value(snap.u, ex);
    } catch (const DomainError&) {
      // state left |u| <= K; the nan records that honestly
    }
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", snap.t,
                  sup_u, min_u, sup_ux, min_ux, lval, snap.sup_abs_ut, snap.dt);
    out << buf;
  }
  if (!out) throw ConfigError("write failed: " + path);
}

std::string report_json_text(const RunResult& r) {
  json j;
  j["schema"] = "dhj.report.v1";
  j["config_hash"] = config_hash_hex(r.cfg);
  j["params"] = {{"p", r.cfg.params.p},
                 {"q", r.cfg.params.q},
                 {"M", r.cfg.params.M},
                 {"eps", r.cfg.params.eps},
                 {"K", r.cfg.params.K}};
  j["derived"] = {{"m_b", r.derived.m_b}, {"alpha", r.derived.alpha}, {"c5", r.derived.c5}};
  j["status"] = to_string(r.traj.status);
  j["steps_accepted"] = r.traj.steps_accepted;
  j["steps_rejected"] = r.traj.steps_rejected;
  j["t_final"] = r.traj.snapshots.back().t;
  j["udot_sq_integral"] = r.traj.udot_sq_integral;
  if (r.traj.t_star) {
    j["t_star"] = *r.traj.t_star;
    j["blow_side"] = r.traj.blow_side;
  } else {
    j["t_star"] = nullptr;
  }
  if (r.cert) {
    json c;
    c["t_star_base"] = r.cert->t_star_base;
    c["t_star_dx2"] = r.cert->t_star_dx2 ? json(*r.cert->t_star_dx2) : json(nullptr);
    c["t_star_dt2"] = r.cert->t_star_dt2 ? json(*r.cert->t_star_dt2) : json(nullptr);
    c["rel_shift_dx"] = r.cert->rel_shift_dx;
    c["rel_shift_dt"] = r.cert->rel_shift_dt;
    c["stable"] = r.cert->stable();
    j["certificate"] = std::move(c);
  } else {
    j["certificate"] = nullptr;
  }
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(check_json(c));
  j["checks"] = std::move(checks);
  {
    json dv = json::array();
    for (const auto& d : r.profile.divergence)
      dv.push_back({{"t", d.t}, {"min_ratio", d.min_ratio}, {"x_hold_from", d.x_hold_from}});
    j["profile"] = {{"c3", r.profile.c3},
                    {"c4", r.profile.c4},
                    {"c5", r.profile.c5},
                    {"nu", r.profile.nu},
                    {"eta", r.profile.eta},
                    {"two_point", check_json(r.profile.two_point)},
                    {"approaching_divergence", r.profile.approaching_divergence},
                    {"divergence", std::move(dv)}};
  }
  j["outcome"] = outcome_json(r.outcome);
  j["series"] = r.artifacts.series_path.empty()
                    ? json(nullptr)
                    : json(std::filesystem::path(r.artifacts.series_path).filename().string());
  return j.dump(2) + "\n";
}

void write_report_json(const std::string& path, const RunResult& r) {
  write_text_file(path, report_json_text(r));
}

RunResult run_experiment(ExperimentConfig cfg, bool write_outputs) {
  RunResult r;
  const double sup_u0 = cfg.u0.sup_abs(cfg.params.M);
  r.derived = validate(cfg.params, sup_u0);

  std::vector<double> u0 = cfg.u0.build(cfg.solve.n, cfg.params.M);
  r.traj = solve(cfg.params, u0, cfg.solve);

  const bool critical =
      std::abs(cfg.params.M - r.derived.m_b) <=
      cfg.monitor.critical_rtol * std::max(1.0, r.derived.m_b);
  if (r.traj.status == SolveStatus::threshold_crossed && !critical) {
    // No certificate at critical mass: the singular profile's grid-limited
    // gradient crosses any fixed threshold without blowing up.
    r.cert = certify_blowup(cfg.params, cfg.solve,
                            [&](std::size_t n) { return cfg.u0.build(n, cfg.params.M); });
  }

  r.checks.push_back(comparison_check(r.traj, u0, cfg.monitor));
  r.checks.push_back(supersolution_check(cfg.params, r.traj, sup_u0, cfg.monitor));
  r.checks.push_back(ut_upper_bound_check(cfg.params, r.traj, sup_u0, cfg.monitor));
  r.checks.push_back(gradient_envelope_check(cfg.params, r.traj, sup_u0, cfg.monitor));
  r.profile = blowup_profile_check(cfg.params, r.traj, cfg.monitor);

  r.outcome = classify(cfg.params, r.traj, r.cert ? &*r.cert : nullptr, cfg.monitor);
  r.cfg = std::move(cfg);

  if (write_outputs) {
    const std::string dir = resolve_output_dir(r.cfg.output);
    std::filesystem::create_directories(dir);
    r.artifacts.dir = dir;
    r.artifacts.series_path = dir + "/series.csv";
    r.artifacts.report_path = dir + "/report.json";
    r.artifacts.config_path = dir + "/config.json";
    write_series_csv(r.artifacts.series_path, r.cfg.params, r.traj, r.cfg.monitor.exec);
    write_text_file(r.artifacts.config_path, to_json_text(r.cfg) + "\n");
    write_report_json(r.artifacts.report_path, r);
  }
  return r;
}

SweepResult run_sweep(const ExperimentConfig& base, const std::vector<double>& masses, int jobs,
                      bool write_outputs) {
  if (masses.empty()) throw RangeError("run_sweep: need at least one mass");
  {
    ProblemParams probe = base.params;  // fail fast on bad (p, q, eps)
    probe.M = masses.front();
    probe.K = 0.0;
    validate(probe, std::max(std::abs(masses.front()), 1.0));
  }

  SweepResult sw;
  sw.m_b = critical_mass(base.params.p, base.params.q);
  sw.records.resize(masses.size());
  std::vector<std::exception_ptr> errors(masses.size());

  const std::string root = write_outputs ? resolve_output_dir(base.output) : std::string();
  if (write_outputs) std::filesystem::create_directories(root);

  auto run_one = [&](std::size_t i) {
    try {
      ExperimentConfig c = base;
      c.params.M = masses[i];
      if (jobs > 1) {
        c.solve.exec = kernels::Exec::serial;
        c.monitor.exec = kernels::Exec::serial;
      }
      if (write_outputs) {
        char sub[64];
        std::snprintf(sub, sizeof sub, "M_%.6g", masses[i]);
        c.output.directory = root + "/" + sub;
      }
      RunResult res = run_experiment(std::move(c), write_outputs);
      SweepRecord& rec = sw.records[i];
      rec.M = masses[i];
      rec.outcome = res.outcome;
      rec.status = res.traj.status;
      rec.t_star = res.traj.t_star;
      rec.steps_accepted = res.traj.steps_accepted;
      rec.dir = res.artifacts.dir;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

#ifdef _OPENMP
  if (jobs > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(masses.size()); ++i)
      run_one(static_cast<std::size_t>(i));
  } else
#endif
  {
    for (std::size_t i = 0; i < masses.size(); ++i) run_one(i);
  }

  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  bool any_lo = false, any_hi = false;
  double m_lo = 0.0, m_hi = 0.0;
  for (const auto& rec : sw.records) {
    if (rec.outcome.kind == Outcome::Kind::converged && (!any_lo || rec.M > m_lo)) {
      m_lo = rec.M;
      any_lo = true;
    }
    if (rec.outcome.kind == Outcome::Kind::gradient_blowup && (!any_hi || rec.M < m_hi)) {
      m_hi = rec.M;
      any_hi = true;
    }
  }
  if (any_lo && any_hi && m_lo < m_hi) sw.m_hat = 0.5 * (m_lo + m_hi);

  if (write_outputs) {
    sw.index_path = root + "/sweep_index.jsonl";
    std::ofstream out(sw.index_path, std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file: " + sw.index_path);
    for (const auto& rec : sw.records) {
      json j;
      j["M"] = rec.M;
      j["outcome"] = outcome_json(rec.outcome);
      j["status"] = to_string(rec.status);
      j["t_star"] = rec.t_star ? json(*rec.t_star) : json(nullptr);
      j["steps_accepted"] = rec.steps_accepted;
      j["dir"] = rec.dir.empty()
                     ? json(nullptr)
                     : json(std::filesystem::path(rec.dir).filename().string());
      out << j.dump() << "\n";
    }
    if (!out) throw ConfigError("write failed: " + sw.index_path);
  }
  return sw;
}

}  // namespace dhj
