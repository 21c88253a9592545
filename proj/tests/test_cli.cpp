#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct RunResult {
  int exit_code = -1;
  std::string out, err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("negfspec_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

/// Runs the installed binary with the given argument string.
RunResult run_cli(const std::string& args) {
  const fs::path out = work_dir() / "stdout.txt";
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd = std::string(NEGF_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string raman_config() {
  return std::string(NEGF_CONFIG_DIR) + "/raman_ladder.json";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("validate accepts the shipped configs") {
  for (const char* name : {"raman_ladder.json", "esa_ladder.json"}) {
    const RunResult r =
        run_cli("validate --config " + std::string(NEGF_CONFIG_DIR) + "/" +
                name);
    CAPTURE(name);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("ok") != std::string::npos);
    CHECK(r.err.empty());
  }
}

TEST_CASE("config errors exit with code 3") {
  SUBCASE("malformed JSON") {
    const fs::path bad = work_dir() / "broken.json";
    spit(bad, "{ this is not json");
    const RunResult r = run_cli("validate --config " + bad.string());
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("error: config:") != std::string::npos);
  }
  SUBCASE("structurally invalid model") {
    std::string text = slurp(raman_config());
    const auto pos = text.find("0.05");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 4, "-0.2");  // negative dephasing, twice (symmetric)
    const auto pos2 = text.find("0.05", pos);
    REQUIRE(pos2 != std::string::npos);
    text.replace(pos2, 4, "-0.2");
    const fs::path bad = work_dir() / "negative.json";
    spit(bad, text);
    const RunResult r = run_cli("validate --config " + bad.string());
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("error: config:") != std::string::npos);
    CHECK(r.err.find("negative") != std::string::npos);
  }
  SUBCASE("missing file") {
    const RunResult r = run_cli("validate --config /nonexistent/nope.json");
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("error: config:") != std::string::npos);
  }
}

TEST_CASE("usage errors exit with code 2") {
  SUBCASE("unknown subcommand") {
    const RunResult r = run_cli("frobnicate");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("error: usage:") != std::string::npos);
  }
  SUBCASE("equal mode indices") {
    const RunResult r = run_cli("sle --config " + raman_config() +
                                " --in 1 --signal 1");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("error: usage:") != std::string::npos);
  }
  SUBCASE("bad route name") {
    const RunResult r = run_cli("sle --config " + raman_config() +
                                " --time-domain --route sideways");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("error: usage:") != std::string::npos);
  }
}

TEST_CASE("numerical guard failures exit with code 4") {
  const RunResult r = run_cli("sle --config " + raman_config() +
                              " --time-domain --omega1 30 --t-end 50");
  CHECK(r.exit_code == 4);
  CHECK(r.err.find("error: numerical-guard:") != std::string::npos);
}

TEST_CASE("scan outputs are deterministic and thread-independent") {
  const std::string scan_args = "sle --config " + raman_config() +
                                " --scan-min 0.9 --scan-max 1.1 --points 21";
  const fs::path a = work_dir() / "scan_a.csv";
  const fs::path b = work_dir() / "scan_b.csv";
  const fs::path c = work_dir() / "scan_c.csv";

  CHECK(run_cli(scan_args + " --output " + a.string()).exit_code == 0);
  CHECK(run_cli(scan_args + " --output " + b.string()).exit_code == 0);
  CHECK(run_cli(scan_args + " --serial --output " + c.string()).exit_code ==
        0);

  const std::string csv_a = slurp(a);
  CHECK(!csv_a.empty());
  CHECK(csv_a == slurp(b));
  CHECK(csv_a == slurp(c));  // parallel and serial scans agree bitwise
  CHECK(csv_a.substr(0, csv_a.find('\n')) == "omega,value");

  // sidecars describe the run and repeat byte-identically
  const std::string meta_a = slurp(a.string() + ".json");
  CHECK(meta_a == slurp(b.string() + ".json"));
  CHECK(meta_a.find("\"command\": \"sle\"") != std::string::npos);
}

TEST_CASE("single-point evaluation prints the frozen peak value") {
  const RunResult r = run_cli("sle --config " + raman_config() +
                              " --omega1 1.5 --omega2 1.0");
  CHECK(r.exit_code == 0);
  REQUIRE(r.out.find("omega,value") == 0);
  const auto nl = r.out.find('\n');
  const auto comma = r.out.find(',', nl);
  const double value = std::strtod(r.out.c_str() + comma + 1, nullptr);
  CHECK(value == doctest::Approx(2.3687048432675004).epsilon(1e-12));
}

TEST_CASE("diagram listing writes a loadable JSON description") {
  const fs::path json_path = work_dir() / "loops.json";
  const fs::path dot_path = work_dir() / "loops.dot";
  const RunResult r = run_cli("diagrams --config " + raman_config() +
                              " --process sle --json " + json_path.string() +
                              " --dot " + dot_path.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("loops: 1") != std::string::npos);
  CHECK(r.out.find("time-ordered: 3") != std::string::npos);
  CHECK(r.out.find("loop 0") != std::string::npos);

  const std::string json_text = slurp(json_path);
  CHECK(json_text.find("\"loops\"") != std::string::npos);
  CHECK(slurp(dot_path).find("digraph") != std::string::npos);

  const RunResult pp = run_cli("diagrams --config " +
                               std::string(NEGF_CONFIG_DIR) +
                               "/esa_ladder.json --process pump-probe");
  CHECK(pp.exit_code == 0);
  CHECK(pp.out.find("loops: 8") != std::string::npos);
  CHECK(pp.out.find("time-ordered: 16") != std::string::npos);
}

TEST_CASE("time-domain output and route flag") {
  const std::string base = "sle --config " + raman_config() +
                           " --time-domain --t-end 30";
  const fs::path a = work_dir() / "ts_a.csv";
  const fs::path b = work_dir() / "ts_b.csv";
  CHECK(run_cli(base + " --output " + a.string()).exit_code == 0);
  CHECK(run_cli(base + " --route factorized --output " + b.string())
            .exit_code == 0);
  const std::string csv_a = slurp(a);
  const std::string csv_b = slurp(b);
  CHECK(csv_a.substr(0, csv_a.find('\n')) == "t,value");
  CHECK(!csv_b.empty());
  CHECK(csv_a != csv_b);  // routes differ at rounding level but not beyond
}

TEST_CASE("ensemble summary prints the scaling split") {
  const RunResult r = run_cli("ensemble --config " + raman_config() +
                              " --n 4 --box 5 --seed 7 --dk 0,0,0" +
                              " --omega1 1.5 --omega2 1.5");
  CHECK(r.exit_code == 0);
  for (const char* key :
       {"f_re=", "f_im=", "pair_sum=", "single=", "coherent=", "total="}) {
    CAPTURE(key);
    CHECK(r.out.find(key) != std::string::npos);
  }
  // dk = 0: pair sum is exactly N(N-1)
  CHECK(r.out.find("pair_sum=12") != std::string::npos);
}

TEST_CASE("wave-mixing amplitude detection emits complex columns") {
  // signal mode carrier (1.0) differs from the net combination (1.5):
  // the process is rejected as inconsistent user input
  const RunResult bad = run_cli(
      "wave-mixing --config " + raman_config() +
      " --signal 1 --detection amplitude --incoming 0:1 --net 1");
  CHECK(bad.exit_code == 2);
  CHECK(bad.err.find("error: usage:") != std::string::npos);

  // an elastic configuration (signal carrier at the drive frequency) works
  std::string text = slurp(raman_config());
  const auto pos = text.find("\"omega\": 1.0");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 12, "\"omega\": 1.5");
  const fs::path elastic = work_dir() / "elastic.json";
  spit(elastic, text);

  const RunResult ok = run_cli(
      "wave-mixing --config " + elastic.string() +
      " --signal 1 --detection amplitude --incoming 0:1 --net 1");
  CAPTURE(ok.err);
  CHECK(ok.exit_code == 0);
  REQUIRE(ok.out.find("omega,re,im") == 0);
  int rows = 0;
  for (char ch : ok.out)
    if (ch == '\n') ++rows;
  CHECK(rows == 2);  // header + one point
}

TEST_CASE("oracle subcommand produces a short spectrum") {
  const fs::path out = work_dir() / "oracle.csv";
  const RunResult r = run_cli("oracle --config " + raman_config() +
                              " --signal 1 --drive 0:1.5 --scan-min 0.98" +
                              " --scan-max 1.02 --points 3 --t-end 60" +
                              " --n-max 1 --step-check 1e-2 --output " +
                              out.string());
  CAPTURE(r.err);
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(out);
  CHECK(csv.substr(0, csv.find('\n')) == "omega,value");
  int rows = 0;
  for (char ch : csv)
    if (ch == '\n') ++rows;
  CHECK(rows == 4);  // header + three points
}

}  // TEST_SUITE
