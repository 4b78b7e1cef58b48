#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch_amalgamated.hpp>

#include "afm/scenario.hpp"

using Catch::Approx;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string tmp_dir(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("afm_test_" + name)).string();
}

const char* small_flow = R"(
scenario.name = small
field.kind = constant
field.a = 0.1
field.b = 0.05
grid.nx = 12
grid.ny = 12
flow.c = 0.5
flow.u0 = slice:0.6
flow.u0_amp = 0.05
flow.u0_ky = 1
flow.dt = 2e-3
flow.t_max = 0.5
flow.record_every = 0.1
)";

} // namespace

TEST_CASE("splitmix64 reference stream") {
    afm::SplitMix64 rng(0);
    CHECK(rng.next() == 0xe220a8397b1dcdafULL);
    CHECK(rng.next() == 0x6e789e6aa1b965f4ULL);
    CHECK(rng.next() == 0x06c45d188009454fULL);
    afm::SplitMix64 u(42);
    for (int k = 0; k < 1000; ++k) {
        const double x = u.uniform01();
        CHECK((x >= 0.0 && x < 1.0));
    }
}

TEST_CASE("config parsing") {
    const auto cfg = afm::Config::parse("# header\n  flow.c = 1.5  # trailing\n\nname=a b\n");
    CHECK(cfg.number("flow.c") == 1.5);
    CHECK(cfg.get("name") == "a b");
    CHECK(cfg.number_or("flow.dt", 3.0) == 3.0);
    try {
        cfg.get("flow.u0");
        FAIL("expected missing key");
    } catch (const afm::config_error& e) {
        CHECK(std::string(e.what()) == "missing key flow.u0");
    }
    try {
        afm::Config::parse("a=1\n   oops\n");
        FAIL("expected parse error");
    } catch (const afm::config_error& e) {
        CHECK(e.line == 2);
        CHECK(e.column == 4);
    }
    try {
        afm::Config::parse("a=1\nb =  x1\n").number("b");
        FAIL("expected bad number");
    } catch (const afm::config_error& e) {
        CHECK(e.line == 2);
        CHECK(e.column == 6);
    }
    CHECK_THROWS_AS(afm::Config::parse("a=1\na=2\n"), afm::config_error);
    CHECK_THROWS_AS(afm::Config::parse("=2\n"), afm::config_error);
    CHECK(afm::Config::parse("s=0x10").seed_or("s", 0) == 16u);
    CHECK_THROWS_AS(afm::Config::parse("s=-1").seed_or("s", 0), afm::config_error);
}

TEST_CASE("config round trip") {
    const std::string text = "z.b = 2\n# c\na.x=hello   \n  m = slice:0.5\n";
    const auto once = afm::Config::parse(text).serialize();
    CHECK(once == "a.x=hello\nm=slice:0.5\nz.b=2\n");
    CHECK(afm::Config::parse(once).serialize() == once);
}

TEST_CASE("missing flow.c is reported") {
    auto cfg = afm::Config::parse("field.kind=constant\ngrid.nx=8\ngrid.ny=8\nflow.u0=slice:0\nflow.dt=1e-3\n");
    try {
        afm::run_simulate(cfg, tmp_dir("missing"));
        FAIL("expected config error");
    } catch (const afm::config_error& e) {
        CHECK(std::string(e.what()) == "missing key flow.c");
    }
}

TEST_CASE("simulate writes artifacts and is deterministic") {
    const auto cfg = afm::Config::parse(small_flow);
    const auto d1 = tmp_dir("det1"), d2 = tmp_dir("det2"), d3 = tmp_dir("det3");
    const auto r1 = afm::run_simulate(cfg, d1, 1);
    afm::run_simulate(cfg, d2, 1);
    afm::run_simulate(cfg, d3, 3);
    const auto s1 = slurp(d1 + "/series.csv");
    CHECK(s1.rfind("t,w,v,min_theta,max_H_minus_c,lower_env,upper_env,monitor_flags\n", 0) == 0);
    CHECK(s1 == slurp(d2 + "/series.csv"));
    CHECK(s1 == slurp(d3 + "/series.csv"));
    CHECK(slurp(d1 + "/final_u.txt") == slurp(d3 + "/final_u.txt"));
    CHECK(slurp(d1 + "/report.txt").find("scenario: small") != std::string::npos);
    CHECK(r1.run.history.size() == 6u);
}

TEST_CASE("expected outcome failures give exit 1") {
    auto cfg = afm::Config::parse(small_flow);
    cfg.set("expect.converged", "true");
    const auto r = afm::run_simulate(cfg, tmp_dir("expect"));
    CHECK(r.exit_code == afm::exit_failure);
    CHECK(std::find(r.failures.begin(), r.failures.end(), "expect.converged") != r.failures.end());
}

TEST_CASE("verify suites pass") {
    for (const char* suite : {"geometry", "gamma", "christoffel", "codazzi"}) {
        const auto r = afm::run_verify(suite, 100, 17, 0.01, tmp_dir("verify"));
        INFO(r.summary);
        CHECK(r.exit_code == afm::exit_pass);
    }
    CHECK_THROWS_AS(afm::run_verify("nope", 10, 1, 0.01, tmp_dir("verify")), afm::config_error);
    const auto a = slurp(tmp_dir("verify") + "/verify_gamma.csv");
    afm::run_verify("gamma", 100, 17, 0.01, tmp_dir("verify"));
    CHECK(a == slurp(tmp_dir("verify") + "/verify_gamma.csv"));
}

TEST_CASE("bundled configs") {
    const std::string dir = AFM_CONFIG_DIR;
    std::string summary;
    CHECK(afm::run_scenario(afm::Config::load(dir + "/gamma_verify.cfg"), tmp_dir("bundled_gamma"), 1, &summary) ==
          afm::exit_pass);
    CHECK(afm::run_scenario(afm::Config::load(dir + "/fuchsian_c1.cfg"), tmp_dir("bundled_c1"), 2, &summary) ==
          afm::exit_pass);
    std::ifstream in(tmp_dir("bundled_c1") + "/final_u.txt");
    const auto grid = afm::read_grid<double>(in);
    for (double u : grid.u) CHECK(u == Approx(std::atanh(0.5)).margin(1e-6));
}

TEST_CASE("oracle on stationary and moving data") {
    const auto z = afm::run_oracle(0.0, 0.0, 0.0, 0.5, 1e-3, 8, tmp_dir("oracle0"));
    CHECK(z.gap == 0.0);
    const auto m = afm::run_oracle(1.0, 0.1, 1.0, 1.0, 1e-3, 8, tmp_dir("oracle1"));
    CHECK(m.gap < 1e-4);
    CHECK(m.bracket_ok);
    CHECK(m.exit_code == afm::exit_pass);
}
