#pragma once
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "afm/errors.hpp"

namespace afm {

template <class Real> using Mat2 = Eigen::Matrix<Real, 2, 2>;
template <class Real> using Vec2 = Eigen::Matrix<Real, 2, 1>;
template <class Real> using Mat3 = Eigen::Matrix<Real, 3, 3>;
template <class Real> using Vec3 = Eigen::Matrix<Real, 3, 1>;

inline constexpr double max_abs_radius = 20.0;

// pointwise data of the central minimal surface: A = [[a, b], [b, -a]],
// m = d1 a = -d2 b, n = d2 a = d1 b
template <class Real = double>
struct ShapeSample {
    Real a{};
    Real b{};
    Real m{};
    Real n{};

    Real lambda2() const { return a * a + b * b; }
    Real lambda() const { using std::sqrt; return sqrt(lambda2()); }
};

template <class Real>
void require_almost_fuchsian(const ShapeSample<Real>& s) {
    if (!(s.lambda2() < Real(1)))
        throw std::domain_error("shape sample not almost-Fuchsian: a^2 + b^2 >= 1");
}

template <class Real>
void require_radius(Real r) {
    using std::abs;
    if (!(abs(r) <= Real(max_abs_radius)))
        throw std::overflow_error("radius outside |r| <= 20");
}

template <class Real = double>
struct MetricData {
    Real r{};
    Real lambda2{};
    Mat2<Real> E;
    Mat2<Real> Er;      // dE/dr
    Mat2<Real> Einv;
    Real detE{};
    Mat2<Real> g;
    Mat2<Real> ginv;
    Real alpha{}, beta{}, eta{};  // F = E^-1 dE/dr
    Mat2<Real> Ar;      // E dE/dr = (1/2) dg/dr

    Mat2<Real> F() const {
        Mat2<Real> f;
        f << alpha, beta, beta, eta;
        return f;
    }
};

template <class Real>
Mat2<Real> shape_matrix(const ShapeSample<Real>& s) {
    Mat2<Real> A;
    A << s.a, s.b, s.b, -s.a;
    return A;
}

template <class Real>
MetricData<Real> build_metric_data(const ShapeSample<Real>& s, Real r) {
    using std::cosh; using std::sinh;
    require_almost_fuchsian(s);
    require_radius(r);
    const Real ch = cosh(r), sh = sinh(r);
    const Real l2 = s.lambda2();
    const Mat2<Real> I = Mat2<Real>::Identity();
    const Mat2<Real> A = shape_matrix(s);

    MetricData<Real> d;
    d.r = r;
    d.lambda2 = l2;
    d.E = ch * I + sh * A;
    d.Er = sh * I + ch * A;
    d.detE = Real(1) + (Real(1) - l2) * sh * sh;
    d.Einv = (ch * I - sh * A) / d.detE;
    d.g = (ch * ch + sh * sh * l2) * I + Real(2) * ch * sh * A;
    d.ginv = d.Einv * d.Einv;
    const Real s2 = Real(2) * sh * ch;
    const Real c2 = ch * ch + sh * sh;
    d.Ar = (Real(1) + l2) / Real(2) * s2 * I + c2 * A;
    const Real diag = s2 * (Real(1) - l2) / Real(2);
    d.alpha = (diag + s.a) / d.detE;
    d.beta = s.b / d.detE;
    d.eta = (diag - s.a) / d.detE;
    return d;
}

template <class Real = double>
struct EquidistantCurvatures {
    Real k1{}, k2{};
    Real H{};
    Real dHdr{};
};

// dH/dr of the equidistant family of a surface with principal curvatures l1, l2
template <class Real>
Real mean_curvature_rate(Real l1, Real l2, Real r) {
    using std::cosh; using std::sinh;
    const Real ch = cosh(r), sh = sinh(r);
    const Real d1 = ch + l1 * sh, d2 = ch + l2 * sh;
    return (Real(1) - l1 * l1) / (d1 * d1) + (Real(1) - l2 * l2) / (d2 * d2);
}

template <class Real>
EquidistantCurvatures<Real> equidistant_curvatures(const ShapeSample<Real>& s, Real r) {
    using std::tanh; using std::atanh;
    require_almost_fuchsian(s);
    require_radius(r);
    const Real l = s.lambda();
    EquidistantCurvatures<Real> c;
    c.k1 = tanh(atanh(l) + r);
    c.k2 = tanh(-atanh(l) + r);
    c.H = c.k1 + c.k2;
    c.dHdr = mean_curvature_rate(l, -l, r);
    return c;
}

template <class Real = double>
struct ChristoffelSet {
    Mat2<Real> B;            // coefficient on e~1 of nabla_{e~i} e~j
    Mat2<Real> C;            // coefficient on e~2
    Mat2<Real> radial_down;  // nabla_{e~i} e~j has -radial_down(i,j) along n
    Mat2<Real> mixed;        // nabla_{e~i} n = mixed(i,k) e~k
};

template <class Real>
ChristoffelSet<Real> christoffels(const ShapeSample<Real>& s, const MetricData<Real>& md) {
    using std::cosh; using std::sinh;
    const Real ch = cosh(md.r), sh = sinh(md.r);
    const Real a = s.a, b = s.b, m = s.m, n = s.n;
    const Real D = Real(2) * md.detE;
    const Real am_bn = a * m + b * n;
    const Real an_bm = a * n - b * m;

    const Real B11 = -Real(2) * sh * (-m * ch + am_bn * sh) / D;
    const Real B12 = Real(2) * sh * (n * ch - an_bm * sh) / D;
    const Real C11 = Real(2) * sh * (n * ch + an_bm * sh) / D;
    const Real C12 = -Real(2) * sh * (m * ch + am_bn * sh) / D;

    ChristoffelSet<Real> cs;
    cs.B << B11, B12, B12, -B11;
    cs.C << C11, C12, C12, -C11;
    cs.radial_down = md.Ar;
    cs.mixed = md.F();
    return cs;
}

template <class Real>
ChristoffelSet<Real> christoffels(const ShapeSample<Real>& s, Real r) {
    return christoffels(s, build_metric_data(s, r));
}

// (1/2) g'' - (1/4) g' g^-1 g' - g, from closed-form E and dE/dr
template <class Real>
Mat2<Real> radial_ode_residual(const ShapeSample<Real>& s, Real r) {
    const MetricData<Real> md = build_metric_data(s, r);
    const Mat2<Real> dg = Real(2) * md.E * md.Er;
    const Mat2<Real> d2g = Real(2) * md.Er * md.Er + Real(2) * md.E * md.E;
    return d2g / Real(2) - dg * md.ginv * dg / Real(4) - md.g;
}

} // namespace afm
