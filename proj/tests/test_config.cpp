#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "dhj/config.hpp"
#include "dhj/errors.hpp"

using namespace dhj;

TEST_CASE("JSON round trip is lossless") {
  ExperimentConfig cfg;
  cfg.params.p = 3.5;
  cfg.params.q = 4.7;
  cfg.params.M = 1.25;
  cfg.params.eps = 0.0625;
  cfg.solve.n = 123;
  cfg.solve.dt_max = 7.5e-4;
  cfg.solve.stepper = Stepper::explicit_euler;
  cfg.solve.exec = kernels::Exec::serial;
  cfg.solve.early_stop_ut = 1e-7;
  cfg.monitor.sup_tol = 2.5e-3;
  cfg.monitor.m0_relax = true;
  cfg.monitor.exec = kernels::Exec::serial;
  cfg.u0.kind = "poly";
  cfg.u0.coeffs = {0.0, 1.0, 0.75, -0.5};  // 0 at 0, 1.25 at 1
  cfg.output.directory = "elsewhere/run1";

  const std::string text = to_json_text(cfg);
  ExperimentConfig back;
  apply_json_text(back, text);
  CHECK(canonical_dump(back) == canonical_dump(cfg));
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(config_hash_hex(back) == config_hash_hex(cfg));
  CHECK(back.solve.stepper == Stepper::explicit_euler);
  CHECK(back.solve.exec == kernels::Exec::serial);
  CHECK(back.params.eps == 0.0625);
  CHECK(back.u0.coeffs == cfg.u0.coeffs);

  // Compact form parses to the same configuration.
  ExperimentConfig compact;
  apply_json_text(compact, to_json_text(cfg, -1));
  CHECK(canonical_dump(compact) == canonical_dump(cfg));
}

TEST_CASE("hash is stable for defaults and sensitive to every section") {
  const ExperimentConfig def;
  const std::string hex = config_hash_hex(def);
  CHECK(hex.size() == 16);
  CHECK(config_hash_hex(ExperimentConfig{}) == hex);

  ExperimentConfig a;
  a.params.M = 2.0;
  CHECK(config_hash_hex(a) != hex);
  ExperimentConfig b;
  b.solve.n = 401;
  CHECK(config_hash_hex(b) != hex);
  ExperimentConfig c;
  c.monitor.delta = 0.2;
  CHECK(config_hash_hex(c) != hex);
  ExperimentConfig d;
  d.output.directory = "x";
  CHECK(config_hash_hex(d) != hex);
  ExperimentConfig e;
  e.u0.kind = "table";
  e.u0.xs = {0.0, 1.0};
  e.u0.ys = {0.0, 1.0};
  CHECK(config_hash_hex(e) != hex);
}

TEST_CASE("patch semantics: absent keys keep their values") {
  ExperimentConfig cfg;
  cfg.params.M = 2.5;
  cfg.solve.n = 333;
  apply_json_text(cfg, R"({"params": {"eps": 0.05}})");
  CHECK(cfg.params.eps == 0.05);
  CHECK(cfg.params.M == 2.5);   // untouched
  CHECK(cfg.solve.n == 333);    // untouched
  apply_json_text(cfg, R"({"solve": {"stepper": "explicit_euler"}, "output": {"directory": "d"}})");
  CHECK(cfg.solve.stepper == Stepper::explicit_euler);
  CHECK(cfg.output.directory == "d");
  CHECK(cfg.params.M == 2.5);
}

TEST_CASE("malformed input raises ConfigError naming the problem") {
  ExperimentConfig cfg;
  // Unknown keys, anywhere.
  CHECK_THROWS_AS(apply_json_text(cfg, R"({"bogus": 1})"), ConfigError);
  CHECK_THROWS_AS(apply_json_text(cfg, R"({"params": {"pp": 3}})"), ConfigError);
  CHECK_THROWS_AS(apply_json_text(cfg, R"({"solve": {"dtmax": 1}})"), ConfigError);
  try {
    apply_json_text(cfg, R"({"params": {"pp": 3}})");
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("params.pp") != std::string::npos);
  }
  // Bad enum values and type mismatches.
  CHECK_THROWS_AS(apply_json_text(cfg, R"({"solve": {"stepper": "rk4"}})"), ConfigError);
  CHECK_THROWS_AS(apply_json_text(cfg, R"({"solve": {"stepper": 5}})"), ConfigError);
  CHECK_THROWS_AS(apply_json_text(cfg, R"({"solve": {"exec": "gpu"}})"), ConfigError);
  CHECK_THROWS_AS(apply_json_text(cfg, R"({"params": {"p": "three"}})"), ConfigError);
  CHECK_THROWS_AS(apply_json_text(cfg, R"({"solve": {"n": 1.5}})"), ConfigError);
  // Parse failures.
  CHECK_THROWS_AS(apply_json_text(cfg, "{"), ConfigError);
  CHECK_THROWS_AS(apply_json_text(cfg, "[1,2]"), ConfigError);
}

TEST_CASE("initial profiles: linear, polynomial, table") {
  U0Spec lin;  // default: M x
  const auto ul = lin.build(3, 2.0);  // nodes at 0, 1/4, 1/2, 3/4, 1
  REQUIRE(ul.size() == 5);
  CHECK(ul[0] == 0.0);
  CHECK(ul[2] == 1.0);
  CHECK(ul[4] == 2.0);
  CHECK(lin.sup_abs(2.0) == doctest::Approx(2.0));

  U0Spec poly;
  poly.kind = "poly";
  poly.coeffs = {0.0, 0.5, 0.5};  // x/2 + x^2/2: pins 0 and 1
  const auto up = poly.build(3, 1.0);
  CHECK(up[1] == doctest::Approx(0.25 * 0.5 + 0.0625 * 0.5).epsilon(1e-15));
  CHECK(up[4] == 1.0);  // boundary forced exactly after the pin check

  U0Spec tab;
  tab.kind = "table";
  tab.xs = {0.0, 0.5, 1.0};
  tab.ys = {0.0, 0.9, 1.0};
  const auto ut = tab.build(4, 1.0);  // dx = 1/5
  REQUIRE(ut.size() == 6);
  CHECK(ut[1] == doctest::Approx(0.9 * 0.4).epsilon(1e-12));   // interpolated at x = 0.2
  CHECK(ut[3] == doctest::Approx(0.9 + 0.1 * 0.2).epsilon(1e-12));  // x = 0.6
  CHECK(tab.sup_abs(1.0) == doctest::Approx(1.0).epsilon(1e-6));

  // Pin violations and malformed tables.
  U0Spec bad_pin;
  bad_pin.kind = "poly";
  bad_pin.coeffs = {0.1, 0.9};  // u0(0) = 0.1
  CHECK_THROWS_AS(bad_pin.build(3, 1.0), ConfigError);
  U0Spec bad_mass;
  bad_mass.kind = "poly";
  bad_mass.coeffs = {0.0, 0.5};  // u0(1) = 0.5 != M
  CHECK_THROWS_AS(bad_mass.build(3, 1.0), ConfigError);
  U0Spec bad_xs;
  bad_xs.kind = "table";
  bad_xs.xs = {0.0, 0.5, 0.5, 1.0};
  bad_xs.ys = {0.0, 0.4, 0.6, 1.0};
  CHECK_THROWS_AS(bad_xs.build(3, 1.0), ConfigError);  // not strictly increasing
  U0Spec short_span;
  short_span.kind = "table";
  short_span.xs = {0.1, 1.0};
  short_span.ys = {0.0, 1.0};
  CHECK_THROWS_AS(short_span.build(3, 1.0), ConfigError);  // must span [0,1]
  U0Spec mismatched;
  mismatched.kind = "table";
  mismatched.xs = {0.0, 1.0};
  mismatched.ys = {0.0, 1.0, 2.0};
  CHECK_THROWS_AS(mismatched.build(3, 1.0), ConfigError);
  U0Spec unknown;
  unknown.kind = "spline";
  CHECK_THROWS_AS(unknown.build(3, 1.0), ConfigError);
}

TEST_CASE("config files load as patches onto the defaults") {
  const std::string path = "/tmp/dhj_test_cfg.json";
  {
    std::ofstream out(path);
    out << R"({"params": {"M": 3.0, "eps": 0.03}, "solve": {"n": 400}})";
  }
  const ExperimentConfig cfg = load_config_file(path);
  CHECK(cfg.params.M == 3.0);
  CHECK(cfg.params.eps == 0.03);
  CHECK(cfg.solve.n == 400);
  CHECK(cfg.solve.dt_init == ExperimentConfig{}.solve.dt_init);  // untouched default
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_config_file("/tmp/definitely_missing_dhj.json"), ConfigError);
}

TEST_CASE("output directories resolve under the workspace root variable") {
  OutputConfig out;
  out.directory = "runs/a";
  setenv("DHJ_OUTPUT_ROOT", "/tmp/dhj_root", 1);
  CHECK(resolve_output_dir(out) == "/tmp/dhj_root/runs/a");
  out.directory = "/abs/path";
  CHECK(resolve_output_dir(out) == "/abs/path");  // absolute paths win
  unsetenv("DHJ_OUTPUT_ROOT");
  out.directory = "runs/a";
  CHECK(resolve_output_dir(out) == "runs/a");
}
