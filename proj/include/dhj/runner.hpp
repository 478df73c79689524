#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dhj/config.hpp"
#include "dhj/monitor.hpp"
#include "dhj/params.hpp"
#include "dhj/solver.hpp"

namespace dhj {

/// Paths of the files one run leaves behind (empty when writing is off).
struct RunArtifacts {
  std::string dir;
  std::string series_path;
  std::string report_path;
  std::string config_path;
};

/// Everything a finished run produced: the validated configuration (K
/// resolved), the trajectory, the refinement certificate when one was
/// attempted, the a-priori bound checks, the gradient-profile report and
/// the final classification.
struct RunResult {
  ExperimentConfig cfg;
  DerivedConstants derived;
  Trajectory traj;
  std::optional<BlowupCertificate> cert;
  std::vector<BoundCheck> checks;  ///< comparison, supersolution, ut bound, envelopes
  ProfileReport profile;
  Outcome outcome;
  RunArtifacts artifacts;
};

/// Full pipeline: validate, build u0, integrate, certify a threshold
/// crossing (skipped at critical mass, where no certificate may be issued),
/// run the bound checks, classify. With write_outputs the resolved output
/// directory receives series.csv, report.json and config.json.
RunResult run_experiment(ExperimentConfig cfg, bool write_outputs = true);

/// series.csv: "# schema=dhj.series.v1", a header line, then one row per
/// snapshot with t, sup_u, min_u, sup_ux, min_ux, lyapunov, sup_ut, dt.
/// The lyapunov column is nan for states outside the |u| <= K domain.
void write_series_csv(const std::string& path, const ProblemParams& prm, const Trajectory& traj,
                      kernels::Exec ex);

/// report.json body for a finished run (schema dhj.report.v1).
std::string report_json_text(const RunResult& result);

/// report.json for a finished run (schema dhj.report.v1).
void write_report_json(const std::string& path, const RunResult& result);

struct SweepRecord {
  double M = 0.0;
  Outcome outcome;
  SolveStatus status = SolveStatus::reached_t_end;
  std::optional<double> t_star;
  std::size_t steps_accepted = 0;
  std::string dir;  ///< per-run artifact directory ("" when writing is off)
};

struct SweepResult {
  std::vector<SweepRecord> records;  ///< in the caller's mass order
  double m_b = 0.0;
  /// Midpoint of the largest converged and the smallest blown-up mass;
  /// empty unless both classifications occur.
  std::optional<double> m_hat;
  std::string index_path;
};

/// Runs the base configuration once per boundary mass. jobs > 1 fans the
/// masses out over an OpenMP team and switches the inner kernels to the
/// serial path (results are bit-identical either way; the kernels are
/// elementwise with fixed-order reductions). Artifacts land in
/// subdirectories M_<value> plus a sweep_index.jsonl, one JSON line per
/// mass in the caller's order.
SweepResult run_sweep(const ExperimentConfig& base, const std::vector<double>& masses,
                      int jobs = 1, bool write_outputs = true);

}  // namespace dhj
