// End-to-end checks of the command-line driver.  Every case shells out to
// the real binary (path in the DHJ_CLI environment variable, set by ctest;
// falls back to ./dhj for manual runs from the build directory) and pins
// down exit codes, stdout wording and artifact files.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

std::string cli_path() {
  const char* p = std::getenv("DHJ_CLI");
  return p ? std::string(p) : std::string("./dhj");
}

CliResult run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int rc = pclose(pipe);
  CliResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.output = std::move(out);
  return r;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string whole_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "dhj_cli_test";
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("cli binary is reachable") {
  REQUIRE(fs::exists(cli_path()));
}

TEST_CASE("steady subcommand: default, supercritical and csv output") {
  auto def = run_cli("steady");
  CHECK(def.exit_code == 0);
  CHECK(contains(def.output, "m_b = 2"));
  CHECK(contains(def.output, "k = 0.5625"));
  CHECK(contains(def.output, "residual(grid = 256)"));

  auto over = run_cli("steady -M 2.5");
  CHECK(over.exit_code == 3);
  CHECK(contains(over.output, "no steady state"));

  const fs::path dir = scratch_dir();
  const fs::path csv = dir / "steady.csv";
  auto with_csv = run_cli("steady --csv " + csv.string());
  CHECK(with_csv.exit_code == 0);
  REQUIRE(fs::exists(csv));
  CHECK(first_line(csv) == "# schema=dhj.steady.v1");
}

TEST_CASE("run subcommand: converged run writes artifacts and report re-reads them") {
  const fs::path dir = scratch_dir();
  const fs::path out = dir / "runA";
  auto r = run_cli("run -M 1 --eps 0.05 -n 64 --t-end 8 --early-stop-ut 1e-5 -o " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "outcome: Converged"));
  CHECK(contains(r.output, "k = 0.5625"));

  REQUIRE(fs::exists(out / "series.csv"));
  REQUIRE(fs::exists(out / "report.json"));
  REQUIRE(fs::exists(out / "config.json"));
  CHECK(first_line(out / "series.csv") == "# schema=dhj.series.v1");

  const json report = json::parse(whole_file(out / "report.json"));
  CHECK(report.at("schema").get<std::string>() == "dhj.report.v1");
  CHECK(report.at("outcome").at("kind").get<std::string>() == "Converged");

  const json cfg = json::parse(whole_file(out / "config.json"));
  CHECK(cfg.at("params").at("M").get<double>() == 1.0);

  auto rep = run_cli("report " + out.string());
  CHECK(rep.exit_code == 0);
  CHECK(contains(rep.output, "m_b = 2"));
  CHECK(contains(rep.output, "outcome: Converged"));

  auto missing = run_cli("report " + (dir / "does_not_exist").string());
  CHECK(missing.exit_code == 1);
  CHECK(contains(missing.output, "error:"));
}

TEST_CASE("run subcommand: certified blow-up exits 2, critical mass exits 3") {
  auto blow = run_cli("run -M 3 --eps 0.05 -n 96 --threshold 20 --t-end 2 --no-output");
  CHECK(blow.exit_code == 2);
  CHECK(contains(blow.output, "GradientBlowUp"));
  CHECK(contains(blow.output, "side = left"));
  CHECK(contains(blow.output, "stable = yes"));

  auto crit = run_cli("run -M 2 -n 48 --t-end 0.5 --no-output");
  CHECK(crit.exit_code == 3);
  CHECK(contains(crit.output, "Undetermined"));
  CHECK(contains(crit.output, "critical mass"));
}

TEST_CASE("run subcommand: --json emits a machine-readable report") {
  auto r = run_cli(
      "run -M 1 --eps 0.05 -n 48 --t-end 2 --early-stop-ut 1e-4 --no-output --json");
  CHECK(r.exit_code == 0);
  REQUIRE_FALSE(r.output.empty());
  CHECK(r.output.front() == '{');
  const json report = json::parse(r.output);
  CHECK(report.at("schema").get<std::string>() == "dhj.report.v1");
  CHECK(report.at("outcome").at("kind").get<std::string>() == "Converged");
}

TEST_CASE("argument errors use the parser's exit codes") {
  auto bad_flag = run_cli("run --frobnicate");
  CHECK(bad_flag.exit_code == 109);
  CHECK(contains(bad_flag.output, "--frobnicate"));

  auto no_sub = run_cli("");
  CHECK(no_sub.exit_code == 106);
}

TEST_CASE("lyapunov-check passes at the default operating point") {
  auto r = run_cli("lyapunov-check");
  CHECK(r.exit_code == 0);
  const json rep = json::parse(r.output);
  CHECK(rep.at("eqdif").at("ok").get<bool>());
  CHECK(rep.at("tou").at("ok").get<bool>());
  CHECK(rep.at("eqdif").at("max_abs").get<double>() < 1e-4);
  CHECK(rep.at("tou").at("max_abs").get<double>() < 1e-5);
}

TEST_CASE("sweep subcommand: flip midpoint and bit-identical parallel index") {
  const fs::path dir = scratch_dir();
  const std::string common =
      "sweep --masses 1 3 -n 128 --eps 0.05 --t-end 2.5 --early-stop-ut 1e-4 --threshold 20 ";

  auto serial_jobs = run_cli(common + "-j 1 -o " + (dir / "sw1").string());
  CHECK(serial_jobs.exit_code == 0);
  CHECK(contains(serial_jobs.output, "Converged"));
  CHECK(contains(serial_jobs.output, "GradientBlowUp"));
  CHECK(contains(serial_jobs.output, "m_b = 2"));
  CHECK(contains(serial_jobs.output, "m_hat = 2 (flip midpoint)"));

  auto parallel_jobs = run_cli(common + "-j 4 -o " + (dir / "sw2").string());
  CHECK(parallel_jobs.exit_code == 0);

  const std::string idx1 = whole_file(dir / "sw1" / "sweep_index.jsonl");
  const std::string idx2 = whole_file(dir / "sw2" / "sweep_index.jsonl");
  REQUIRE_FALSE(idx1.empty());
  CHECK(idx1 == idx2);

  // Each line of the index is one self-contained JSON record.
  std::size_t lines = 0;
  std::size_t pos = 0;
  while (pos < idx1.size()) {
    const std::size_t nl = idx1.find('\n', pos);
    const std::string line = idx1.substr(pos, nl - pos);
    if (!line.empty()) {
      const json rec = json::parse(line);
      CHECK(rec.contains("M"));
      CHECK(rec.at("outcome").contains("kind"));
      ++lines;
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  CHECK(lines == 2);
}
