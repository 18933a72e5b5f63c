#include <doctest.h>

#include <string>

#include "dsdc/config.hpp"

using namespace dsdc;

namespace {

const char* kMinimal = R"(
[kernel]
theta.form = power
theta.a = 1
theta.p = 1
kappa.form = zero

[init]
family = monodisperse
a = 1

[run]
n = 64
T = 1
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("minimal config gets every default") {
  const RunConfig cfg = parse_config(kMinimal);
  RunConfig expect;
  CHECK(cfg == expect);
  CHECK(cfg.run.n == 64);
  CHECK(cfg.run.T == 1.0);
  CHECK(eval_kernel(cfg.kernel, 2, 3) == 6.0);
  CHECK(std::get<Monodisperse>(cfg.init).a == 1.0);
  CHECK(cfg.checks.bounds == all_bound_ids());
  CHECK(cfg.sweep.n_list.empty());
}

TEST_CASE("the empty document is the default configuration") { CHECK(parse_config("") == RunConfig{}); }

TEST_CASE("validation errors name the key and the line") {
  SUBCASE("power-tail exponent at most 1") {
    const std::string e = error_of("[init]\nfamily = power_tail\nq = 0.5\n");
    CHECK(contains(e, "init.q"));
    CHECK(contains(e, "line 3"));
  }
  SUBCASE("negative horizon") {
    const std::string e = error_of("# header\n[run]\nT = -1\n");
    CHECK(contains(e, "run.T"));
    CHECK(contains(e, "line 3"));
  }
  SUBCASE("line number is carried on the exception") {
    try {
      parse_config("[run]\n\nn = 0\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.line() == 3);
      CHECK(contains(e.what(), "run.n"));
    }
  }
}

TEST_CASE("structural errors") {
  CHECK(contains(error_of("[bogus]\n"), "unknown section"));
  CHECK(contains(error_of("[run]\nnn = 3\n"), "unknown key"));
  CHECK(contains(error_of("[run]\nn = 3\nn = 4\n"), "duplicate key"));
  CHECK(contains(error_of("n = 3\n"), "outside of any section"));
  CHECK(contains(error_of("[run]\nn 3\n"), "key = value"));
  CHECK(contains(error_of("[run\n"), "malformed"));
  CHECK(contains(error_of("[run]\nn = 3x\n"), "run.n"));
  CHECK(contains(error_of("[run]\nT = abc\n"), "run.T"));
}

TEST_CASE("range checks on every section") {
  CHECK(contains(error_of("[run]\nn = 4\ntail_cutoffs = 1, 5\n"), "run.tail_cutoffs"));
  CHECK(contains(error_of("[run]\neta = 1\n"), "run.eta"));
  CHECK(contains(error_of("[run]\ndelta = 0\n"), "run.delta"));
  CHECK(contains(error_of("[checks]\nkappa0 = 2\n"), "checks.kappa0"));
  CHECK(contains(error_of("[checks]\nt1 = 0.5\nt2 = 0.25\n"), "checks.t2"));
  CHECK(contains(error_of("[checks]\nn_probe = 4\n"), "checks.n_probe"));
  CHECK(contains(error_of("[checks]\nbounds = EST1, NOPE\n"), "checks.bounds"));
  CHECK(contains(error_of("[sweep]\nn_list = 8, 16\n"), "sweep.n_list"));
  CHECK(contains(error_of("[sweep]\nn_list = 8, 32, 16\n"), "sweep.n_list"));
  CHECK(contains(error_of("[kernel]\ntheta.form = cubic\n"), "kernel.theta.form"));
  CHECK(contains(error_of("[kernel]\nkappa.form = table\nkappa.values = 0, 1, 2, 0\n"), "kernel.kappa"));
  CHECK(contains(error_of("[init]\nfamily = geometric\nr = 1.5\n"), "init.r"));
  CHECK(contains(error_of("[integrator]\nrel_tol = -1\n"), "[integrator]"));
  CHECK(contains(error_of("[output]\ncsv =\n"), "output.csv"));
}

TEST_CASE("tabulated kernels bound the admissible n") {
  const char* table = "[kernel]\ntheta.form = table\ntheta.values = 1, 2\n[run]\nn = 3\n";
  CHECK(contains(error_of(table), "run.n"));
  const RunConfig ok = parse_config("[kernel]\ntheta.form = table\ntheta.values = 1, 2\n[run]\nn = 2\n");
  CHECK(eval_kernel(ok.kernel, 2, 2) == 4.0);
}

TEST_CASE("bounds lists") {
  CHECK(parse_config("[checks]\nbounds = none\n").checks.bounds.empty());
  CHECK(parse_config("[checks]\nbounds = all\n").checks.bounds == all_bound_ids());
  const auto b = parse_config("[checks]\nbounds = EST1, GEL_PRODUCT\n").checks.bounds;
  CHECK(b == std::vector<BoundId>{BoundId::EST1, BoundId::GEL_PRODUCT});
}

TEST_CASE("emit and parse round-trip") {
  SUBCASE("defaults") {
    const RunConfig c;
    CHECK(parse_config(emit_config(c)) == c);
  }
  SUBCASE("every section away from its default") {
    RunConfig c;
    c.kernel = KernelSpec{ThetaSequence::power(0.7, 0.75), KappaModel::scaled_product(0.3), DeclaredClass::sublinear};
    c.init = PowerTail{0.1, 1.5};
    c.run.n = 40;
    c.run.T = 2.5;
    c.run.samples = 37;
    c.run.tail_cutoffs = {3, 9};
    c.run.eta = 0.25;
    c.run.delta = 0.125;
    c.integrator.method = Method::fixed_rk4;
    c.integrator.rhs_path = RhsPath::general;
    c.integrator.rel_tol = 1e-9;
    c.integrator.abs_tol = 3e-13;
    c.integrator.h_fixed = 1.0 / 3.0;
    c.integrator.clamp_tol = 1e-14;
    c.checks.bounds = {BoundId::MASSRBND, BoundId::EST2};
    c.checks.C = 0.1;
    c.checks.kappa0 = 1.5;
    c.checks.t1 = 0.5;
    c.checks.t2 = 2.0;
    c.checks.n_probe = 16;
    c.sweep.n_list = {8, 16, 32};
    c.sweep.oracle_max_n = 16;
    c.sweep.loss_ratio = 0.75;
    c.output.dir = "out";
    c.output.head_size = 3;
    CHECK(parse_config(emit_config(c)) == c);
  }
  SUBCASE("tables and empty bound list") {
    RunConfig c;
    c.kernel = KernelSpec{ThetaSequence::table({1.0, 0.5, 0.1}), KappaModel::table(3, {1, 2, 3, 2, 4, 5, 3, 5, 6})};
    c.init = TableInit{{0.1, 0.2, 0.30000000000000004}};
    c.run.n = 3;
    c.run.tail_cutoffs = {1, 2};
    c.checks.bounds = {};
    CHECK(parse_config(emit_config(c)) == c);
  }
}

TEST_CASE("load_config on a missing file") {
  CHECK_THROWS_AS(load_config("/nonexistent/dsdc/run.cfg"), ConfigError);
}
