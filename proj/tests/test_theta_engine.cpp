#include <catch_amalgamated.hpp>

#include "afm/scenario.hpp"
#include "afm/theta_engine.hpp"

using Catch::Approx;
using afm::ShapeSample;

TEST_CASE("closed form at a seeded tuple") {
    const ShapeSample<double> s{0.03, -0.02, 0.01, 0.015};
    CHECK(afm::theta_rhs_closed_form(s, 0.3, 1.0, 0.9, 0.7) == Approx(0.3374091136740854).epsilon(1e-13));
    CHECK(afm::theta_rhs_assembled(s, 0.3, 1.0, 0.9, 0.7) == Approx(0.3374091136740854).epsilon(1e-13));
}

TEST_CASE("Gamma coefficients on the totally geodesic Fuchsian slice") {
    const auto G = afm::gamma_coefficients(ShapeSample<double>{}, 0.0, 1.0);
    CHECK(G.g1 == 0.0);
    CHECK(G.g2 == Approx(32.0).epsilon(1e-15));
    CHECK(G.g3 == 0.0);
    CHECK(G.g4 == 0.0);
    CHECK(G.g5 == 0.0);
}

TEST_CASE("frame change is orthogonal") {
    for (double th : {1e-6, 0.2, 0.5, 0.9, 1.0}) {
        const auto f = afm::make_frame_pair(th);
        const afm::Mat3<double> I = afm::Mat3<double>::Identity();
        CHECK((f.to_hat * f.to_hat.transpose() - I).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((f.to_hat * f.to_surface - I).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(f.to_hat(0, 0) == th);
    }
    CHECK_THROWS_AS(afm::make_frame_pair(0.0), std::domain_error);
    CHECK_THROWS_AS(afm::make_frame_pair(1.5), std::domain_error);
}

TEST_CASE("constrained second fundamental form") {
    const auto A = afm::constrained_second_ff(0.4, -0.1, 0.3, 0.8, 1.2);
    CHECK(A.A11 + A.A22 == Approx(1.2));
    CHECK(A.A11 - A.A22 == Approx(0.1));
    CHECK(A.A12 == Approx((0.8 * 0.5 - 1.2) / 2));
    CHECK(A.norm2() == Approx(A.A11 * A.A11 + 2 * A.A12 * A.A12 + A.A22 * A.A22));
}

TEST_CASE("Lie derivative pieces") {
    const ShapeSample<double> s{0.2, 0.1, 0.05, -0.03};
    const auto md = afm::build_metric_data(s, 0.4);
    CHECK((afm::lie_derivative_tangent(md, 1.0) - 2 * md.F()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(afm::lie_derivative_vv(s, 0.4, 1.0) == 0.0);
    CHECK(afm::lie_derivative_vv(md.alpha, md.beta, md.eta, 0.0) ==
          Approx((md.alpha + 2 * md.beta + md.eta) / 2));
    CHECK_THROWS_AS(afm::lie_derivative_vv(s, 0.4, 1.2), std::domain_error);
}

TEST_CASE("closed and assembled forms agree on random tuples") {
    afm::SplitMix64 rng(2024);
    for (int k = 0; k < 1000; ++k) {
        const auto s = afm::random_sample(rng, 0.3);
        const double r0 = rng.uniform(-2, 2), c = rng.uniform(0, 1.9);
        const double th = rng.uniform(0.2, 0.999), H = rng.uniform(-3, 3);
        const double cl = afm::theta_rhs_closed_form(s, r0, c, th, H);
        const double as = afm::theta_rhs_assembled(s, r0, c, th, H);
        const double diff = std::abs(cl - as);
        CHECK((diff <= 1e-12 || diff / std::abs(cl) <= 1e-9));
    }
}

TEST_CASE("Gamma bounds hold in the small-data regime") {
    afm::SplitMix64 rng(99);
    for (int k = 0; k < 2000; ++k) {
        const auto s = afm::random_sample(rng, 7e-6);
        const double r0 = rng.uniform(-10, 10), c = rng.uniform(0, 1.99);
        const auto G = afm::gamma_coefficients(s, r0, c).as_array();
        const auto B = afm::gamma_bounds(r0);
        for (int i = 0; i < 5; ++i) CHECK(std::abs(G[i]) <= B[i]);
    }
}

TEST_CASE("angle function guard") {
    const ShapeSample<double> s{};
    CHECK_THROWS_AS(afm::theta_rhs_closed_form(s, 0.0, 1.0, 5e-7, 0.0), std::domain_error);
    CHECK_THROWS_AS(afm::theta_rhs_assembled(s, 0.0, 1.0, 1.01, 0.0), std::domain_error);
    CHECK_THROWS_AS(afm::theta_rhs_assembled(s, 0.0, 2.0, 0.5, 0.0), std::domain_error);
    CHECK_NOTHROW(afm::theta_rhs_closed_form(s, 0.0, 1.0, 1e-6, 0.0));
}
