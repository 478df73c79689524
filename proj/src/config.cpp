#include "dhj/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dhj/errors.hpp"

namespace dhj {

namespace {

using nlohmann::json;

double poly_eval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) v = v * x + c[j];
  return v;
}

double table_eval(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  const double f = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + f * (ys[i] - ys[i - 1]);
}

void require_pins(double at0, double at1, double M, const char* kind) {
  if (std::abs(at0) > 1e-12 || std::abs(at1 - M) > 1e-12 * std::max(1.0, std::abs(M)))
    throw ConfigError(std::string("u0 (") + kind +
                      ") violates the boundary pins u(0) = 0, u(1) = M to 1e-12");
}

// --- patch helpers: read a key if present, error on unknown keys ----------

void check_keys(const json& j, std::initializer_list<const char*> known,
                const std::string& scope) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigError("unknown config key: " + scope + "." + it.key());
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out, const std::string& scope) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for " + scope + "." + key + ": " + e.what());
  }
}

// nlohmann converts JSON floats to integer targets by truncation; grid sizes
// must be stated exactly, so only unsigned-integer JSON values are accepted.
void get_if(const json& j, const char* key, std::size_t& out, const std::string& scope) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0))
    throw ConfigError("bad value for " + scope + "." + key + ": expected a non-negative integer");
  out = v.get<std::size_t>();
}

std::string get_enum_string(const json& j, const char* key, const std::string& scope) {
  try {
    return j.at(key).get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for " + scope + "." + key + ": " + e.what());
  }
}

void get_stepper(const json& j, const char* key, Stepper& out, const std::string& scope) {
  if (!j.contains(key)) return;
  const std::string s = get_enum_string(j, key, scope);
  if (s == "semi_implicit") out = Stepper::semi_implicit;
  else if (s == "explicit_euler") out = Stepper::explicit_euler;
  else throw ConfigError("bad value for " + scope + "." + key + ": " + s);
}

void get_exec(const json& j, const char* key, kernels::Exec& out, const std::string& scope) {
  if (!j.contains(key)) return;
  const std::string s = get_enum_string(j, key, scope);
  if (s == "openmp") out = kernels::Exec::openmp;
  else if (s == "serial") out = kernels::Exec::serial;
  else throw ConfigError("bad value for " + scope + "." + key + ": " + s);
}

void apply_patch(ExperimentConfig& cfg, const json& j) {
  check_keys(j, {"params", "u0", "solve", "monitor", "output"}, "config");

  if (j.contains("params")) {
    const json& s = j.at("params");
    check_keys(s, {"p", "q", "M", "eps", "K"}, "params");
    get_if(s, "p", cfg.params.p, "params");
    get_if(s, "q", cfg.params.q, "params");
    get_if(s, "M", cfg.params.M, "params");
    get_if(s, "eps", cfg.params.eps, "params");
    get_if(s, "K", cfg.params.K, "params");
  }
  if (j.contains("u0")) {
    const json& s = j.at("u0");
    check_keys(s, {"kind", "coeffs", "xs", "ys"}, "u0");
    get_if(s, "kind", cfg.u0.kind, "u0");
    get_if(s, "coeffs", cfg.u0.coeffs, "u0");
    get_if(s, "xs", cfg.u0.xs, "u0");
    get_if(s, "ys", cfg.u0.ys, "u0");
  }
  if (j.contains("solve")) {
    const json& s = j.at("solve");
    check_keys(s,
               {"n", "stepper", "dt_init", "dt_min", "dt_max", "cfl_safety", "du_max", "t_end",
                "blowup_grad_threshold", "snapshot_dt", "early_stop_ut", "early_stop_t_min",
                "record_steps", "exec"},
               "solve");
    get_if(s, "n", cfg.solve.n, "solve");
    get_stepper(s, "stepper", cfg.solve.stepper, "solve");
    get_if(s, "dt_init", cfg.solve.dt_init, "solve");
    get_if(s, "dt_min", cfg.solve.dt_min, "solve");
    get_if(s, "dt_max", cfg.solve.dt_max, "solve");
    get_if(s, "cfl_safety", cfg.solve.cfl_safety, "solve");
    get_if(s, "du_max", cfg.solve.du_max, "solve");
    get_if(s, "t_end", cfg.solve.t_end, "solve");
    get_if(s, "blowup_grad_threshold", cfg.solve.blowup_grad_threshold, "solve");
    get_if(s, "snapshot_dt", cfg.solve.snapshot_dt, "solve");
    get_if(s, "early_stop_ut", cfg.solve.early_stop_ut, "solve");
    get_if(s, "early_stop_t_min", cfg.solve.early_stop_t_min, "solve");
    get_if(s, "record_steps", cfg.solve.record_steps, "solve");
    get_exec(s, "exec", cfg.solve.exec, "solve");
  }
  if (j.contains("monitor")) {
    const json& s = j.at("monitor");
    check_keys(s,
               {"t0", "t1", "nu", "eta", "delta", "slack_c", "sup_tol", "c1_tol",
                "critical_rtol", "tail_fraction", "m0_relax", "exec"},
               "monitor");
    get_if(s, "t0", cfg.monitor.t0, "monitor");
    get_if(s, "t1", cfg.monitor.t1, "monitor");
    get_if(s, "nu", cfg.monitor.nu, "monitor");
    get_if(s, "eta", cfg.monitor.eta, "monitor");
    get_if(s, "delta", cfg.monitor.delta, "monitor");
    get_if(s, "slack_c", cfg.monitor.slack_c, "monitor");
    get_if(s, "sup_tol", cfg.monitor.sup_tol, "monitor");
    get_if(s, "c1_tol", cfg.monitor.c1_tol, "monitor");
    get_if(s, "critical_rtol", cfg.monitor.critical_rtol, "monitor");
    get_if(s, "tail_fraction", cfg.monitor.tail_fraction, "monitor");
    get_if(s, "m0_relax", cfg.monitor.m0_relax, "monitor");
    get_exec(s, "exec", cfg.monitor.exec, "monitor");
  }
  if (j.contains("output")) {
    const json& s = j.at("output");
    check_keys(s, {"directory"}, "output");
    get_if(s, "directory", cfg.output.directory, "output");
  }
}

}  // namespace

std::vector<double> U0Spec::build(std::size_t n, double M) const {
  if (n < 1) throw ConfigError("u0.build: need at least one interior node");
  const double dx = 1.0 / static_cast<double>(n + 1);
  std::vector<double> u(n + 2);

  if (kind == "linear") {
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = M * (static_cast<double>(i) * dx);
  } else if (kind == "poly") {
    if (coeffs.empty()) throw ConfigError("u0 (poly): coeffs must be non-empty");
    require_pins(poly_eval(coeffs, 0.0), poly_eval(coeffs, 1.0), M, "poly");
    for (std::size_t i = 0; i < u.size(); ++i)
      u[i] = poly_eval(coeffs, static_cast<double>(i) * dx);
  } else if (kind == "table") {
    if (xs.size() != ys.size() || xs.size() < 2)
      throw ConfigError("u0 (table): xs and ys must match and hold at least two samples");
    for (std::size_t i = 1; i < xs.size(); ++i)
      if (!(xs[i] > xs[i - 1])) throw ConfigError("u0 (table): xs must increase strictly");
    if (std::abs(xs.front()) > 1e-12 || std::abs(xs.back() - 1.0) > 1e-12)
      throw ConfigError("u0 (table): xs must span [0, 1]");
    require_pins(ys.front(), ys.back(), M, "table");
    for (std::size_t i = 0; i < u.size(); ++i)
      u[i] = table_eval(xs, ys, static_cast<double>(i) * dx);
  } else {
    throw ConfigError("u0.kind must be one of linear|poly|table, got: " + kind);
  }

  u.front() = 0.0;
  u.back() = M;
  return u;
}

double U0Spec::sup_abs(double M) const {
  const std::size_t fine = 2048;
  auto u = build(fine, M);
  double s = 0.0;
  for (double v : u) s = std::max(s, std::abs(v));
  return s;
}

void apply_json_text(ExperimentConfig& cfg, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  apply_patch(cfg, j);
}

std::string to_json_text(const ExperimentConfig& cfg, int indent) {
  json j;
  j["params"] = {{"p", cfg.params.p},
                 {"q", cfg.params.q},
                 {"M", cfg.params.M},
                 {"eps", cfg.params.eps},
                 {"K", cfg.params.K}};
  j["u0"] = {{"kind", cfg.u0.kind},
             {"coeffs", cfg.u0.coeffs},
             {"xs", cfg.u0.xs},
             {"ys", cfg.u0.ys}};
  j["solve"] = {
      {"n", cfg.solve.n},
      {"stepper", cfg.solve.stepper == Stepper::semi_implicit ? "semi_implicit" : "explicit_euler"},
      {"dt_init", cfg.solve.dt_init},
      {"dt_min", cfg.solve.dt_min},
      {"dt_max", cfg.solve.dt_max},
      {"cfl_safety", cfg.solve.cfl_safety},
      {"du_max", cfg.solve.du_max},
      {"t_end", cfg.solve.t_end},
      {"blowup_grad_threshold", cfg.solve.blowup_grad_threshold},
      {"snapshot_dt", cfg.solve.snapshot_dt},
      {"early_stop_ut", cfg.solve.early_stop_ut},
      {"early_stop_t_min", cfg.solve.early_stop_t_min},
      {"record_steps", cfg.solve.record_steps},
      {"exec", cfg.solve.exec == kernels::Exec::openmp ? "openmp" : "serial"}};
  j["monitor"] = {{"t0", cfg.monitor.t0},
                  {"t1", cfg.monitor.t1},
                  {"nu", cfg.monitor.nu},
                  {"eta", cfg.monitor.eta},
                  {"delta", cfg.monitor.delta},
                  {"slack_c", cfg.monitor.slack_c},
                  {"sup_tol", cfg.monitor.sup_tol},
                  {"c1_tol", cfg.monitor.c1_tol},
                  {"critical_rtol", cfg.monitor.critical_rtol},
                  {"tail_fraction", cfg.monitor.tail_fraction},
                  {"m0_relax", cfg.monitor.m0_relax},
                  {"exec", cfg.monitor.exec == kernels::Exec::openmp ? "openmp" : "serial"}};
  j["output"] = {{"directory", cfg.output.directory}};
  return indent < 0 ? j.dump() : j.dump(indent);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg;
  apply_json_text(cfg, buf.str());
  return cfg;
}

std::string canonical_dump(const ExperimentConfig& cfg) { return to_json_text(cfg, -1); }

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string s = canonical_dump(cfg);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

std::string resolve_output_dir(const OutputConfig& out) {
  const char* root = std::getenv("DHJ_OUTPUT_ROOT");
  if (root == nullptr || out.directory.empty() || out.directory.front() == '/')
    return out.directory;
  return std::string(root) + "/" + out.directory;
}

}  // namespace dhj
