#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "dsdc/config.hpp"
#include "dsdc/io.hpp"
#include "dsdc/runner.hpp"
#include "support.hpp"

using namespace dsdc;
namespace fs = std::filesystem;

namespace {

// A fresh directory per test case, removed on scope exit.
struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("dsdc_io_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

RunConfig quiet_config(std::size_t n, double T) {
  RunConfig cfg;
  cfg.run.n = n;
  cfg.run.T = T;
  cfg.run.samples = 20;
  cfg.run.tail_cutoffs = {1};
  return cfg;
}

const char* kProductCheck = R"(
[kernel]
theta.form = power
theta.p = 1
[init]
family = monodisperse
[run]
n = 64
T = 4
samples = 40
)";

}  // namespace

TEST_CASE("csv header and shape") {
  const RunConfig cfg = quiet_config(4, 1.0);
  const Trajectory traj = simulate(cfg);
  const auto rows = lines_of(csv_string(traj, 8));
  REQUIRE(rows.size() == traj.samples.size() + 1);
  CHECK(rows[0] == "t,M0,M1,M2,I_theta_sq,I_M1_sq,I_M0_sq,I_total_coag,omega_1,omega_2,omega_3,omega_4");
  CHECK(lines_of(csv_string(traj, 2))[0] == "t,M0,M1,M2,I_theta_sq,I_M1_sq,I_M0_sq,I_total_coag,omega_1,omega_2");
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(fields(rows[k]).size() == 12);
}

TEST_CASE("csv of zero data is all zeros beyond the time column") {
  RunConfig cfg = quiet_config(6, 2.0);
  cfg.init = Monodisperse{0.0};
  const auto rows = lines_of(csv_string(simulate(cfg)));
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto f = fields(rows[k]);
    for (std::size_t c = 1; c < f.size(); ++c) REQUIRE(std::stod(f[c]) == 0.0);
  }
}

TEST_CASE("csv with n = 1 has M1 equal to omega_1 and round-trips at 17 digits") {
  RunConfig cfg = quiet_config(1, 3.0);
  cfg.init = Monodisperse{0.7};
  const Trajectory traj = simulate(cfg);
  const std::string text = csv_string(traj);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.back() == '\n');
  const auto rows = lines_of(text);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto f = fields(rows[k]);
    REQUIRE(f.size() == 9);
    CHECK(f[2] == f[8]);
    // exact round trip of the stored value
    CHECK(std::stod(f[8]) == traj.samples[k - 1].state.omega[0]);
    CHECK(std::stod(f[0]) == traj.samples[k - 1].t());
  }
}

TEST_CASE("csv output is byte-deterministic") {
  const RunConfig cfg = parse_config(kProductCheck);
  CHECK(csv_string(simulate(cfg)) == csv_string(simulate(cfg)));
}

TEST_CASE("bound report json schema") {
  BoundReport r;
  r.bound_id = BoundId::EST2;
  r.lhs = 1.0;
  r.rhs = 2.0;
  r.margin = 1.0;
  r.pass = true;
  r.params["t1"] = 0.0;
  r.tolerance_used = 1e-7;
  const auto j = to_json(r);
  for (const char* key : {"bound_id", "lhs", "rhs", "margin", "pass", "params", "tolerance_used", "applicable"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  CHECK(j["bound_id"] == "EST2");
  CHECK(j["params"]["t1"] == 0.0);
  CHECK_FALSE(j.contains("note"));
}

TEST_CASE("run in check mode writes csv and report; product kernel passes everything applicable") {
  ScratchDir dir("check");
  RunOptions opts;
  opts.out_dir = dir.path.string();
  opts.quiet = true;
  CHECK(run(parse_config(kProductCheck), Mode::check, opts) == kExitOk);
  REQUIRE(fs::exists(dir.file("trajectory.csv")));
  const auto doc = nlohmann::json::parse(slurp(dir.file("report.json")));
  CHECK(doc["all_pass"] == true);
  CHECK(doc["n"] == 64);
  // one EST3 and one TAILEST entry per registered cutoff, every other bound once
  CHECK(doc["reports"].size() == all_bound_ids().size() - 2 + 2 * 4);
  CHECK(doc["kernel"]["zeta"] == doctest::Approx(1.0));
  for (const auto& r : doc["reports"]) {
    if (r["applicable"] == true) CHECK_MESSAGE(r["pass"] == true, r["bound_id"]);
  }
}

TEST_CASE("simulate mode writes only the csv") {
  ScratchDir dir("simulate");
  RunOptions opts{dir.path.string(), true};
  CHECK(run(quiet_config(8, 1.0), Mode::simulate, opts) == kExitOk);
  CHECK(fs::exists(dir.file("trajectory.csv")));
  CHECK_FALSE(fs::exists(dir.file("report.json")));
}

TEST_CASE("mass bound on a sublinear kernel is reported inapplicable, not failed") {
  ScratchDir dir("sublinear");
  RunConfig cfg = quiet_config(32, 2.0);
  cfg.kernel = dsdc::testing::power_kernel(0.5);
  cfg.checks.bounds = {BoundId::MASSRBND};
  CHECK(run(cfg, Mode::check, {dir.path.string(), true}) == kExitOk);
  const auto doc = nlohmann::json::parse(slurp(dir.file("report.json")));
  REQUIRE(doc["reports"].size() == 1);
  CHECK(doc["reports"][0]["applicable"] == false);
  CHECK(doc["reports"][0]["pass"] == false);
  CHECK(doc["reports"][0].contains("note"));
}

TEST_CASE("a kernel table shorter than the probe leaves probe-based checks inapplicable") {
  ScratchDir dir("small_table");
  RunConfig cfg = quiet_config(4, 2.0);
  cfg.kernel = KernelSpec{ThetaSequence::table({1, 1, 1, 1}), KappaModel::table(4, std::vector<double>(16, 1.0))};
  CHECK(run(cfg, Mode::check, {dir.path.string(), true}) == kExitOk);
  const auto doc = nlohmann::json::parse(slurp(dir.file("report.json")));
  for (const auto& r : doc["reports"]) {
    const std::string id = r["bound_id"];
    if (id == "MASSRBND" || id == "GEL_PRODUCT" || id == "APPENDIX_M0") CHECK_MESSAGE(r["applicable"] == false, id);
    if (id == "EST1" || id == "AMC") CHECK_MESSAGE(r["pass"] == true, id);
  }
  cfg.checks.C_uniform = 1.0;
  cfg.checks.bounds = {BoundId::APPENDIX_M0};
  CHECK(run(cfg, Mode::check, {dir.path.string(), true}) == kExitOk);
  CHECK(nlohmann::json::parse(slurp(dir.file("report.json")))["reports"][0]["applicable"] == true);
}

TEST_CASE("an overstated lower-bound constant makes the gelation bound fail with status 2") {
  ScratchDir dir("overstated");
  RunConfig cfg = parse_config(kProductCheck);
  cfg.checks.zeta = 100.0;
  cfg.checks.bounds = {BoundId::GEL_PRODUCT};
  CHECK(run(cfg, Mode::check, {dir.path.string(), true}) == kExitBoundFailure);
  const auto doc = nlohmann::json::parse(slurp(dir.file("report.json")));
  CHECK(doc["all_pass"] == false);
  CHECK(doc["reports"][0]["pass"] == false);
}

TEST_CASE("integration failure maps to status 3") {
  ScratchDir dir("hmin");
  RunConfig cfg = parse_config(kProductCheck);
  cfg.integrator.h_init = 0.5;
  cfg.integrator.h_min = 0.5;
  CHECK(run(cfg, Mode::check, {dir.path.string(), true}) == kExitNumericalFailure);
}

TEST_CASE("configuration problems map to status 1") {
  ScratchDir dir("config");
  CHECK(run_file(dir.file("missing.cfg"), Mode::check, {dir.path.string(), true}) == kExitConfigError);
  std::ofstream(dir.file("bad.cfg")) << "[run]\nT = -1\n";
  CHECK(run_file(dir.file("bad.cfg"), Mode::check, {dir.path.string(), true}) == kExitConfigError);
  CHECK(run(quiet_config(8, 1.0), Mode::sweep, {dir.path.string(), true}) == kExitConfigError);
}

TEST_CASE("sweep mode writes the refinement report") {
  ScratchDir dir("sweep");
  RunConfig cfg = quiet_config(8, 10.0);
  cfg.run.samples = 100;
  cfg.sweep.n_list = {128, 256, 512};
  CHECK(run(cfg, Mode::sweep, {dir.path.string(), true}) == kExitOk);
  const auto doc = nlohmann::json::parse(slurp(dir.file("sweep.json")));
  CHECK(doc["classification"] == "gelling_trend");
  REQUIRE(doc["runs"].size() == 3);
  for (const auto& r : doc["runs"]) {
    CHECK(r["mass_retention"].get<double>() + r["mass_loss"].get<double>() == doctest::Approx(1.0));
    CHECK(r["gel_time"].is_number());
  }
}

TEST_CASE("check outputs are identical across repeated runs") {
  ScratchDir a("repeat_a"), b("repeat_b");
  const RunConfig cfg = parse_config(kProductCheck);
  run(cfg, Mode::check, {a.path.string(), true});
  run(cfg, Mode::check, {b.path.string(), true});
  CHECK(slurp(a.file("trajectory.csv")) == slurp(b.file("trajectory.csv")));
  CHECK(slurp(a.file("report.json")) == slurp(b.file("report.json")));
}

#ifdef DSDC_CLI_PATH
namespace {

int cli(const std::string& args) {
  const std::string cmd = std::string(DSDC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("command-line exit codes") {
  ScratchDir dir("cli");
  const std::string out = " --out-dir " + dir.path.string() + " --quiet";
  std::ofstream(dir.file("ok.cfg")) << kProductCheck;
  std::ofstream(dir.file("bad.cfg")) << "[init]\nfamily = power_tail\nq = 0.5\n";
  std::ofstream(dir.file("fail.cfg")) << kProductCheck << "[checks]\nzeta = 100\nbounds = GEL_PRODUCT\n";
  std::ofstream(dir.file("hmin.cfg")) << kProductCheck << "[integrator]\nh_init = 0.5\nh_min = 0.5\n";

  CHECK(cli("version") == 0);
  CHECK(cli(out + " simulate " + dir.file("ok.cfg")) == 0);
  CHECK(cli(out + " check " + dir.file("ok.cfg")) == 0);
  CHECK(cli(out + " --seed 7 check " + dir.file("ok.cfg")) == 0);
  CHECK(cli(out + " check " + dir.file("bad.cfg")) == 1);
  CHECK(cli(out + " sweep " + dir.file("ok.cfg")) == 1);
  CHECK(cli(out + " check " + dir.file("fail.cfg")) == 2);
  CHECK(cli(out + " check " + dir.file("hmin.cfg")) == 3);
  CHECK(cli("frobnicate") == 1);
  CHECK(fs::exists(dir.file("report.json")));
}
#endif
