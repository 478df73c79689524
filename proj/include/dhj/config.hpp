#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dhj/monitor.hpp"
#include "dhj/params.hpp"
#include "dhj/solver.hpp"

namespace dhj {

/// Initial-profile description: "linear" (M x), "poly" (coefficients, low
/// degree first), or "table" (sampled values, linearly interpolated). Every
/// form must meet the boundary pins u(0) = 0 and u(1) = M to 1e-12.
struct U0Spec {
  std::string kind = "linear";
  std::vector<double> coeffs;  ///< poly: u0(x) = sum coeffs[j] x^j
  std::vector<double> xs, ys;  ///< table: nodes (strictly increasing, 0..1) and values

  /// Samples the profile on n interior nodes (n + 2 values including the
  /// boundaries). Throws ConfigError on malformed specs or pin violations.
  std::vector<double> build(std::size_t n, double M) const;
  double sup_abs(double M) const;  ///< sup |u0|, evaluated on a fine sample
};

struct OutputConfig {
  std::string directory = "out";  ///< relative paths resolve under $DHJ_OUTPUT_ROOT
};

/// Everything one run needs; round-trips losslessly through JSON text.
struct ExperimentConfig {
  ProblemParams params;
  U0Spec u0;
  SolveConfig solve;
  MonitorConfig monitor;
  OutputConfig output;
};

/// Applies the keys present in the JSON text onto cfg (patch semantics:
/// absent keys keep their current values). Unknown keys raise ConfigError
/// naming the offending key; so do type mismatches and parse failures.
void apply_json_text(ExperimentConfig& cfg, const std::string& json_text);

/// Full serialization with sorted keys; numbers round-trip exactly.
/// indent < 0 emits the compact single-line form.
std::string to_json_text(const ExperimentConfig& cfg, int indent = 2);

/// Parses the file at path and patches it onto a default config.
ExperimentConfig load_config_file(const std::string& path);

/// Canonical form used for hashing: the compact sorted-key dump.
std::string canonical_dump(const ExperimentConfig& cfg);

/// FNV-1a 64-bit digest of the canonical dump.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string config_hash_hex(const ExperimentConfig& cfg);

/// Output directory with $DHJ_OUTPUT_ROOT applied to relative paths.
std::string resolve_output_dir(const OutputConfig& out);

}  // namespace dhj
