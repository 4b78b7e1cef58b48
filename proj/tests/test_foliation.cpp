#include <numbers>

#include <catch_amalgamated.hpp>

#include "afm/foliation.hpp"

using Catch::Approx;

namespace {

const double L = 2 * std::numbers::pi;

afm::SolverConfig<double> solver(double tol = 1e-9) {
    afm::SolverConfig<double> cfg;
    cfg.run.dt = 2e-3;
    cfg.run.tol = tol;
    cfg.run.t_max = 80;
    cfg.run.record_every = 1.0;
    return cfg;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

} // namespace

TEST_CASE("epsilon gate") {
    const auto g = afm::epsilon_gate(0.1);
    CHECK(g.eps_max == 7e-6);
    CHECK(g.lambda_gate == Approx(std::sqrt(0.1) / 12));
    CHECK(afm::epsilon_gate(1.0).eps_max == 7e-6);
    CHECK(afm::epsilon_gate(1e-12).eps_max < 1e-12);
    CHECK_THROWS_AS(afm::epsilon_gate(0.0), std::domain_error);
    CHECK_THROWS_AS(afm::epsilon_gate(2.0), std::domain_error);
}

TEST_CASE("initial radius window") {
    const auto w0 = afm::initial_radius(0.0, 0.0, 1e-9, 0.1);
    CHECK(w0.lo == 0.0);
    CHECK(w0.hi > 0.0);
    CHECK(afm::initial_radius_left(1.0, 0.0) == Approx(0.5493061443340549).epsilon(1e-14));
    CHECK(afm::initial_radius_left(1.0, 0.02) == Approx(0.5495062243687375).epsilon(1e-14));
    try {
        afm::initial_radius(1.0, 0.0, 1e-6, 0.1);
        FAIL("window should be empty");
    } catch (const afm::empty_window& e) {
        const std::string msg = e.what();
        CHECK(msg.find("0.212595") != std::string::npos);
        CHECK(msg.find("0.549306") != std::string::npos);
    }
    CHECK_THROWS_AS(afm::initial_radius(1.0, 0.0, 1e-3, 0.1), afm::empty_window);
    const double h1 = afm::initial_radius(0.5, 0.0, 1e-12, 0.1).hi;
    const double h2 = afm::initial_radius(0.5, 0.0, 1e-10, 0.1).hi;
    CHECK(h1 > h2);
    CHECK_THROWS_AS(afm::initial_radius(1.99, 0.0, 1e-12, 0.1), std::domain_error);
    CHECK_THROWS_AS(afm::initial_radius(0.5, 0.1, 1e-12, 0.1), std::domain_error);
}

TEST_CASE("integrated rate inversion") {
    auto rate = [](double r) { return afm::mean_curvature_rate(0.0, 0.0, r); };
    CHECK(afm::invert_integrated_rate(rate, 0.6) == Approx(std::atanh(0.3)).epsilon(1e-12));
    CHECK(afm::invert_integrated_rate(rate, 0.0) == 0.0);
    CHECK_THROWS_AS(afm::invert_integrated_rate(rate, 2.5), std::domain_error);
}

TEST_CASE("c grids") {
    const auto d = afm::default_c_grid(0.1);
    REQUIRE(d.size() == 16u);
    CHECK(d.front() == 0.0);
    CHECK(d.back() == Approx(1.95));
    for (std::size_t k = 2; k < d.size(); ++k) CHECK(d[k] - d[k - 1] < d[k - 1] - d[k - 2]);
    CHECK_NOTHROW(afm::require_c_list(d, 0.1));
    CHECK_THROWS_AS(afm::require_c_list(std::vector<double>{0.5, 0.5}, 0.1), std::domain_error);
    CHECK_THROWS_AS(afm::require_c_list(std::vector<double>{0.5, 1.99}, 0.1), std::domain_error);
    const auto l = afm::linear_c_grid(0.1, 1.5, 8);
    CHECK(l.back() == Approx(1.5));
    CHECK(l[1] - l[0] == Approx(0.2));
}

TEST_CASE("Fuchsian sweep reproduces arctanh(c/2)") {
    const auto g = afm::make_constant_field(0.0, 0.0, 8, 8, L, L);
    const std::vector<double> cs{0.2, 0.6, 1.0, 1.4};
    const auto res = afm::sweep_cmc(g, cs, 0.1, solver());
    for (std::size_t k = 0; k < cs.size(); ++k) {
        CHECK(res.converged[k]);
        for (double u : res.surfaces[k]) CHECK(u == Approx(std::atanh(cs[k] / 2)).margin(1e-8));
    }
    CHECK(res.certificate_ok);
    for (const auto& pc : res.distance_bounds) {
        CHECK(pc.g_inv_max == Approx(pc.g_inv_min).epsilon(1e-12));
        CHECK(pc.hi - pc.lo == Approx(2 * 1e-6).margin(1e-8));
    }
}

TEST_CASE("constant-A sweep is ordered and certified") {
    const auto g = afm::make_constant_field(0.1, 0.0, 8, 8, L, L);
    const std::vector<double> cs{0.3, 0.7, 1.1};
    const auto res = afm::sweep_cmc(g, cs, 0.1, solver());
    CHECK(res.certificate_ok);
    for (std::size_t i = 0; i < cs.size(); ++i)
        for (std::size_t j = i + 1; j < cs.size(); ++j) CHECK(res.ordering_ok[i][j]);
    for (const auto& pc : res.distance_bounds) {
        // flat slices carry one curvature pair, so the interval is exact up to slack
        CHECK(pc.hi - pc.lo == Approx(2e-6).margin(1e-9));
        CHECK(pc.inside);
    }
}

TEST_CASE("varying field gives a nondegenerate interval") {
    auto ab = [](double x, double) { return std::pair{0.1 + 0.03 * std::sin(x), 0.0}; };
    const auto g = afm::make_periodic_field<double>(ab, 16, 8, L, L);
    const auto res = afm::sweep_cmc(g, std::vector<double>{0.5, 0.9}, 0.1, solver());
    REQUIRE(res.converged[0]);
    REQUIRE(res.converged[1]);
    const auto& pc = res.distance_bounds[0];
    CHECK(pc.g_inv_min - pc.g_inv_max > 0);
    CHECK(pc.min_theta < 1.0);
    CHECK(pc.inside);
    CHECK(res.certificate_ok);
}

TEST_CASE("uniqueness surrogate: warm and independent starts agree") {
    const auto g = afm::make_constant_field(0.05, 0.02, 8, 8, L, L);
    const std::vector<double> cs{0.3, 0.8, 1.2};
    auto cold = solver();
    cold.warm_start = false;
    const auto a = afm::sweep_cmc(g, cs, 0.1, solver());
    const auto b = afm::sweep_cmc(g, cs, 0.1, cold);
    for (std::size_t k = 0; k < cs.size(); ++k) CHECK(sup_diff(a.surfaces[k], b.surfaces[k]) < 10 * 1e-9);
}

TEST_CASE("smooth dependence on c") {
    const auto g = afm::make_constant_field(0.0, 0.0, 8, 8, L, L);
    const double c = 1.0, slope = 1 / (2 * (1 - c * c / 4));
    double prev = 0;
    for (double d : {0.1, 0.05, 0.025}) {
        const auto res = afm::sweep_cmc(g, std::vector<double>{c, c + d}, 0.1, solver(1e-11));
        const double diff = sup_diff(res.surfaces[0], res.surfaces[1]);
        CHECK(diff / d == Approx(slope).epsilon(0.1));
        if (prev > 0) CHECK(diff / prev == Approx(0.5).epsilon(0.05));
        prev = diff;
    }
}
