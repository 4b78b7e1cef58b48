#include <catch_amalgamated.hpp>

#include "afm/point_geometry.hpp"
#include "afm/scenario.hpp"

using Catch::Approx;
using afm::ShapeSample;

TEST_CASE("metric data at a seeded sample") {
    const ShapeSample<double> s{0.3, -0.2, 0.1, 0.05};
    const auto md = afm::build_metric_data(s, 0.7);
    CHECK(md.detE == Approx(1.5006408324460163).epsilon(1e-14));
    CHECK(md.alpha == Approx(0.751926196285219).epsilon(1e-13));
    CHECK(md.beta == Approx(-0.13327639477462694).epsilon(1e-13));
    CHECK(md.eta == Approx(0.3520970119613381).epsilon(1e-13));
    CHECK(md.g(0, 0) == Approx(2.2215480833825842).epsilon(1e-14));
    CHECK(md.g(0, 1) == Approx(-0.3808603002903069).epsilon(1e-14));
    CHECK((md.E * md.Einv - afm::Mat2<double>::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((md.g * md.ginv - afm::Mat2<double>::Identity()).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((md.Einv * md.Er - md.F()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((md.E * md.Er - md.Ar).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Fuchsian slice is umbilic") {
    const ShapeSample<double> s{};
    for (double r : {-2.0, -0.4, 0.0, 0.9, 3.0}) {
        const auto md = afm::build_metric_data(s, r);
        CHECK(md.alpha == Approx(std::tanh(r)).margin(1e-15));
        CHECK(md.eta == Approx(std::tanh(r)).margin(1e-15));
        CHECK(md.beta == 0.0);
        const auto ec = afm::equidistant_curvatures(s, r);
        CHECK(ec.H == Approx(2 * std::tanh(r)).margin(1e-15));
        CHECK(ec.dHdr == Approx(2 / (std::cosh(r) * std::cosh(r))).epsilon(1e-14));
    }
}

TEST_CASE("equidistant curvatures") {
    const ShapeSample<double> s{0.5, 0.0, 0.0, 0.0};
    const auto ec = afm::equidistant_curvatures(s, 0.3);
    CHECK(ec.k1 == Approx(0.6907068098446205).epsilon(1e-14));
    CHECK(ec.k2 == Approx(-0.2442663170210786).epsilon(1e-14));
    const auto md = afm::build_metric_data(s, 0.3);
    CHECK(md.alpha + md.eta == Approx(ec.H).epsilon(1e-14));
    const double h = 1e-5;
    const double fd = (afm::equidistant_curvatures(s, 0.3 + h).H - afm::equidistant_curvatures(s, 0.3 - h).H) / (2 * h);
    CHECK(ec.dHdr == Approx(fd).epsilon(1e-8));
}

TEST_CASE("Christoffels match finite differences of the metric") {
    const ShapeSample<double> s{0.3, -0.2, 0.1, 0.05};
    const auto cs = afm::christoffels(s, 0.7);
    CHECK(cs.B(0, 0) == Approx(0.055780229756309786).epsilon(1e-8));
    CHECK(cs.B(0, 1) == Approx(0.018303389989539058).epsilon(1e-8));
    CHECK(cs.C(0, 0) == Approx(0.04514621967597346).epsilon(1e-8));
    CHECK(cs.C(0, 1) == Approx(-0.0711189895820692).epsilon(1e-8));
    CHECK(cs.B(1, 1) == -cs.B(0, 0));
    CHECK(cs.C(1, 1) == -cs.C(0, 0));

    afm::SplitMix64 rng(7);
    for (int k = 0; k < 200; ++k) {
        const auto t = afm::random_sample(rng, 0.4);
        const double r = rng.uniform(-2, 2);
        const auto c = afm::christoffels(t, r);
        const auto fd = afm::christoffels_fd(t, r);
        CHECK((c.B - fd[0]).cwiseAbs().maxCoeff() < 1e-7);
        CHECK((c.C - fd[1]).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("radial metric ODE residual vanishes") {
    afm::SplitMix64 rng(11);
    double worst = 0, worst_rel = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto s = afm::random_sample(rng, 0.9);
        const double r = rng.uniform(-2, 2);
        worst = std::max(worst, afm::radial_ode_residual(s, r).cwiseAbs().maxCoeff());
        const double R = rng.uniform(-20, 20);
        const double scale = afm::build_metric_data(s, R).g.cwiseAbs().maxCoeff();
        worst_rel = std::max(worst_rel, afm::radial_ode_residual(s, R).cwiseAbs().maxCoeff() / scale);
    }
    CHECK(worst < 1e-12);
    CHECK(worst_rel < 1e-12);
    CHECK(afm::radial_ode_residual(ShapeSample<double>{0.2, 0.1, 0, 0}, -0.8).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(afm::radial_ode_residual(ShapeSample<double>{0.6, 0.6, 0, 0}, 0.4).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("F tends to +-I at large |r|") {
    const ShapeSample<double> s{0.4, -0.3, 0.1, 0.2};
    const afm::Mat2<double> I = afm::Mat2<double>::Identity();
    CHECK((afm::build_metric_data(s, 20.0).F() - I).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((afm::build_metric_data(s, -20.0).F() + I).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((afm::christoffels(s, 0.0).B).cwiseAbs().maxCoeff() == 0.0);
    CHECK((afm::christoffels(ShapeSample<double>{}, 1.7).C).cwiseAbs().maxCoeff() == 0.0);
    const double expect = -2 * std::sinh(0.5) * (-0.05 * std::cosh(0.5) + 0.005 * std::sinh(0.5)) /
                          (1 + 0.01 + 0.99 * std::cosh(1.0));
    CHECK(afm::christoffels(ShapeSample<double>{0.1, 0.0, 0.05, 0.0}, 0.5).B(0, 0) == Approx(expect).epsilon(1e-14));
}

TEST_CASE("mean curvature rate is positive for |l| < 1") {
    afm::SplitMix64 rng(3);
    for (int k = 0; k < 500; ++k) {
        const double l1 = rng.uniform(-0.99, 0.99), l2 = rng.uniform(-0.99, 0.99), r = rng.uniform(-5, 5);
        CHECK(afm::mean_curvature_rate(l1, l2, r) > 0);
    }
}

TEST_CASE("point geometry domain errors") {
    CHECK_THROWS_AS(afm::build_metric_data(ShapeSample<double>{0.8, 0.6, 0, 0}, 0.0), std::domain_error);
    CHECK_THROWS_AS(afm::build_metric_data(ShapeSample<double>{0.1, 0.0, 0, 0}, 20.5), std::overflow_error);
    CHECK_NOTHROW(afm::build_metric_data(ShapeSample<double>{0.1, 0.0, 0, 0}, -20.0));
}

TEST_CASE("reflection u -> -u with A -> -A") {
    afm::SplitMix64 rng(5);
    for (int k = 0; k < 100; ++k) {
        const auto s = afm::random_sample(rng, 0.5);
        const double r = rng.uniform(-3, 3);
        const ShapeSample<double> t{-s.a, -s.b, -s.m, -s.n};
        const auto p = afm::build_metric_data(s, r), q = afm::build_metric_data(t, -r);
        CHECK((p.g - q.g).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(p.alpha == Approx(-q.alpha).margin(1e-13));
        CHECK(p.eta == Approx(-q.eta).margin(1e-13));
    }
}
