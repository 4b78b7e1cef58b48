#pragma once
#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "afm/point_geometry.hpp"

namespace afm {

template <class Real> using Mat4 = Eigen::Matrix<Real, 4, 4>;
template <class Real> using Mat43 = Eigen::Matrix<Real, 4, 3>;
template <class Real> using Vec4 = Eigen::Matrix<Real, 4, 1>;

inline constexpr double min_theta = 1e-6;

template <class Real>
void require_theta(Real theta) {
    if (!(theta >= Real(min_theta)) || !(theta <= Real(1)))
        throw std::domain_error("angle function outside [1e-6, 1]");
}

// rows of to_hat give (n, e^1, e^2) in the basis (nu, e1, e2); to_surface is the inverse change
template <class Real = double>
struct FramePair {
    Real theta{};
    Mat3<Real> to_hat;
    Mat3<Real> to_surface;
};

template <class Real>
FramePair<Real> make_frame_pair(Real theta) {
    using std::sqrt;
    if (!(theta > Real(0)) || !(theta <= Real(1))) throw std::domain_error("angle function outside (0, 1]");
    const Real k = sqrt(Real(1) - theta * theta) / sqrt(Real(2));
    const Real p = (theta + Real(1)) / Real(2), q = (theta - Real(1)) / Real(2);
    FramePair<Real> f;
    f.theta = theta;
    f.to_hat << theta, k, k,
                -k, p, q,
                -k, q, p;
    f.to_surface << theta, -k, -k,
                    k, p, q,
                    k, q, p;
    return f;
}

template <class Real = double>
struct ConstrainedSecondFF {
    Real A11{}, A12{}, A22{};
    Real H{};

    Real norm2() const { return A11 * A11 + Real(2) * A12 * A12 + A22 * A22; }
};

template <class Real>
ConstrainedSecondFF<Real> constrained_second_ff(Real alpha, Real beta, Real eta, Real theta, Real H) {
    if (!(theta > Real(0)) || !(theta <= Real(1))) throw std::domain_error("angle function outside (0, 1]");
    ConstrainedSecondFF<Real> A;
    A.A11 = (H + alpha - eta) / Real(2);
    A.A22 = (H - alpha + eta) / Real(2);
    A.A12 = (theta * (alpha + eta + Real(2) * beta) - H) / Real(2);
    A.H = H;
    return A;
}

template <class Real>
ConstrainedSecondFF<Real> constrained_second_ff(const MetricData<Real>& md, Real theta, Real H) {
    return constrained_second_ff(md.alpha, md.beta, md.eta, theta, H);
}

template <class Real = double>
struct GammaCoefficients {
    Real g1{}, g2{}, g3{}, g4{}, g5{};

    std::array<Real, 5> as_array() const { return {g1, g2, g3, g4, g5}; }
};

template <class Real>
GammaCoefficients<Real> gamma_coefficients(const ShapeSample<Real>& s, Real r0, Real c) {
    using std::cosh; using std::sinh;
    require_almost_fuchsian(s);
    require_radius(r0);
    if (!(c >= Real(0)) || !(c < Real(2))) throw std::domain_error("target mean curvature outside [0, 2)");
    const Real a = s.a, b = s.b, m = s.m, n = s.n;
    const Real l2 = s.lambda2();
    const Real ch = cosh(r0), sh = sinh(r0);
    const Real c2 = cosh(Real(2) * r0), s2 = sinh(Real(2) * r0);
    const Real c4 = cosh(Real(4) * r0), s4 = sinh(Real(4) * r0);
    const Real c3 = cosh(Real(3) * r0);
    const Real D = Real(1) + l2 + (Real(1) - l2) * c2;
    const Real a2 = a * a, b2 = b * b, w = Real(1) - l2;

    GammaCoefficients<Real> G;
    const Real t1 = w * s2 - Real(2) * b;
    G.g1 = -Real(4) * D * t1 * t1;
    G.g2 = Real(4) * w * w * (Real(1) + l2) * c4
         + Real(16) * w * (w * w + Real(2) * b2) * c2
         + Real(4) * (Real(1) + l2) * (Real(3) * a2 * a2 + Real(3) * (b2 - Real(1)) * (b2 - Real(1))
                                      + Real(2) * a2 * (Real(3) * b2 - Real(7)) - Real(12) * b * w * s2)
         - Real(24) * b * w * w * s4;
    G.g3 = -Real(4) * ((a2 + Real(2) * a * b - b2 - Real(3)) * m + (Real(3) - a2 + Real(2) * a * b + b2) * n) * ch
         + Real(4) * ((Real(1) + a2 + Real(2) * a * b - b2) * m + (-Real(1) - a2 + Real(2) * a * b + b2) * n) * c3
         - Real(8) * (Real(3) * a2 * b * (m - n) + b * (Real(1) + b2) * (n - m) - a2 * a * (m + n)
                      + a * (Real(1) + Real(3) * b2) * (m + n)
                      + (b * (b2 - Real(1)) * (m - n) + Real(3) * a2 * b * (n - m) + a2 * a * (m + n)
                         - a * (Real(3) * b2 - Real(1)) * (m + n)) * c2) * sh;
    G.g4 = Real(32) * ((a2 * (m - n) + b2 * (n - m) + Real(2) * a * b * (m + n)) * sh
                       - (b * (n - m) + a * (m + n)) * ch) * s2;
    G.g5 = (Real(4) * c * sh * ch * w + Real(4) * b * c) / D;
    return G;
}

// the constants bounding |Gamma_i| under the C^1-smallness hypothesis
template <class Real>
std::array<Real, 5> gamma_bounds(Real r0) {
    using std::cosh;
    const Real c = cosh(Real(2) * r0);
    return {Real(108) * c * c * c, Real(368) * c * c, Real(376) * c * c, Real(384) * c * c, Real(6)};
}

template <class Real>
Real theta_rhs_closed_form(const ShapeSample<Real>& s, Real r0, Real c, Real theta, Real H) {
    using std::cosh; using std::sinh; using std::sqrt;
    require_theta(theta);
    const GammaCoefficients<Real> G = gamma_coefficients(s, r0, c);
    const Real l2 = s.lambda2();
    const Real D = Real(1) + l2 + (Real(1) - l2) * cosh(Real(2) * r0);
    const Real T = theta, T2 = theta * theta;
    const Real sq = sqrt(Real(2) * (Real(1) - T2));
    const Real X = (-Real(2) * s.b * (Real(1) - T2) + (Real(1) - l2) * (Real(1) + T2) * sinh(Real(2) * r0)) / (T * D);
    const Real HX = H - X;
    return Real(2) * T2 * HX * HX
         + (G.g1 * (Real(1) - T2 * T2) + G.g2 * T2 * (Real(1) - T2) + G.g3 * T * (Real(1) - T2) * sq
            + G.g4 * T2 * T * sq) / (Real(2) * D * D * D)
         + G.g5 * T * (Real(1) - T2);
}

template <class Real = double>
struct AssemblyWorkspace {
    Mat3<Real> P, Q1, Q2, R1, R2;
    Mat4<Real> U, V, W;
    Mat43<Real> T, S;
    // frame vectors in the (n, e~1, e~2) coordinate basis
    Vec3<Real> nu, e1, e2;
};

template <class Real>
AssemblyWorkspace<Real> build_assembly_workspace(const ShapeSample<Real>& s, Real r0, Real theta) {
    using std::cosh; using std::sinh; using std::sqrt;
    const MetricData<Real> md = build_metric_data(s, r0);
    const ChristoffelSet<Real> cs = christoffels(s, md);
    const Real l2 = md.lambda2;
    const Real a = s.a, b = s.b, m = s.m, n = s.n;
    const Real c2 = cosh(Real(2) * r0), s2 = sinh(Real(2) * r0);
    const Mat2<Real>& K2 = md.Ar;
    const Mat2<Real>& Ei = md.Einv;
    const Real T = theta;
    const Real k = sqrt(Real(1) - T * T) / sqrt(Real(2));
    const Real sq = sqrt(Real(2) * (Real(1) - T * T));
    const Real p = (T + Real(1)) / Real(2), q = (T - Real(1)) / Real(2);

    AssemblyWorkspace<Real> ws;
    ws.P = Mat3<Real>::Zero();
    ws.P(1, 1) = ws.P(2, 2) = Real(1) - l2;

    Mat3<Real> K = Mat3<Real>::Zero();
    K.template bottomRightCorner<2, 2>() = K2;
    Mat3<Real> G1, G2;
    G1 << Real(0), md.alpha, md.beta,
          -K2(0, 0), cs.B(0, 0), cs.C(0, 0),
          -K2(0, 1), cs.B(0, 1), cs.C(0, 1);
    G2 << Real(0), md.beta, md.eta,
          -K2(1, 0), cs.B(1, 0), cs.C(1, 0),
          -K2(1, 1), cs.B(1, 1), cs.C(1, 1);
    ws.Q1 = G1 * K;
    ws.Q2 = G2 * K;

    Mat2<Real> d1, d2;
    d1 << (a * m + b * n) * s2 + c2 * m, c2 * n,
          c2 * n, (a * m + b * n) * s2 - c2 * m;
    d2 << (a * n - b * m) * s2 + c2 * n, -c2 * m,
          -c2 * m, (a * n - b * m) * s2 - c2 * n;
    ws.R1 = Mat3<Real>::Zero();
    ws.R2 = Mat3<Real>::Zero();
    ws.R1.template bottomRightCorner<2, 2>() = d1;
    ws.R2.template bottomRightCorner<2, 2>() = d2;

    ws.nu << T, -k * (Ei(0, 0) + Ei(0, 1)), -k * (Ei(0, 1) + Ei(1, 1));
    ws.e1 << k, p * Ei(0, 0) + q * Ei(0, 1), p * Ei(0, 1) + q * Ei(1, 1);
    ws.e2 << k, q * Ei(0, 0) + p * Ei(0, 1), q * Ei(0, 1) + p * Ei(1, 1);

    ws.U = Vec4<Real>(T, T, k, k).asDiagonal();
    ws.V = Vec4<Real>(sq * (Ei(0, 0) + Ei(0, 1)), sq * (Ei(0, 0) + Ei(0, 1)),
                -((T + Real(1)) * Ei(0, 0) + (T - Real(1)) * Ei(0, 1)),
                -((T - Real(1)) * Ei(0, 0) + (T + Real(1)) * Ei(0, 1))).asDiagonal();
    ws.W = Vec4<Real>(sq * (Ei(1, 1) + Ei(0, 1)), sq * (Ei(1, 1) + Ei(0, 1)),
                -((T + Real(1)) * Ei(0, 1) + (T - Real(1)) * Ei(1, 1)),
                -((T - Real(1)) * Ei(0, 1) + (T + Real(1)) * Ei(1, 1))).asDiagonal();
    ws.T.row(0) = ws.e1.transpose();
    ws.T.row(1) = ws.e2.transpose();
    ws.T.row(2) = -Real(2) * ws.nu.transpose();
    ws.T.row(3) = -Real(2) * ws.nu.transpose();
    ws.S.row(0) = ws.e1.transpose();
    ws.S.row(1) = ws.e2.transpose();
    ws.S.row(2) = ws.e1.transpose();
    ws.S.row(3) = ws.e2.transpose();
    return ws;
}

template <class Real>
Real assembly_trace(const AssemblyWorkspace<Real>& ws) {
    const Mat43<Real> M = ws.U * ws.T * ws.P
                       + ws.V * ws.T * (ws.Q1 + ws.Q1.transpose() - ws.R1) / Real(2)
                       + ws.W * ws.T * (ws.Q2 + ws.Q2.transpose() - ws.R2) / Real(2);
    return (M * ws.S.transpose()).trace();
}

// (L_n g)(nu, nu) without the factor c
template <class Real>
Real lie_derivative_vv(Real alpha, Real beta, Real eta, Real theta) {
    return (Real(1) - theta * theta) * (alpha + Real(2) * beta + eta) / Real(2);
}

template <class Real>
Real lie_derivative_vv(const ShapeSample<Real>& s, Real r0, Real theta) {
    if (!(theta >= Real(0)) || !(theta <= Real(1))) throw std::domain_error("angle function outside [0, 1]");
    const MetricData<Real> md = build_metric_data(s, r0);
    return lie_derivative_vv(md.alpha, md.beta, md.eta, theta);
}

// (L_n g)(e_i, e_j) in the symmetric frame
template <class Real>
Mat2<Real> lie_derivative_tangent(const MetricData<Real>& md, Real theta) {
    Mat2<Real> M;
    M << theta + Real(1), theta - Real(1), theta - Real(1), theta + Real(1);
    return M * md.F() * M / Real(2);
}

template <class Real>
Real theta_rhs_assembled(const ShapeSample<Real>& s, Real r0, Real c, Real theta, Real H) {
    require_theta(theta);
    if (!(c >= Real(0)) || !(c < Real(2))) throw std::domain_error("target mean curvature outside [0, 2)");
    const MetricData<Real> md = build_metric_data(s, r0);
    const ConstrainedSecondFF<Real> A = constrained_second_ff(md, theta, H);
    Mat2<Real> Am;
    Am << A.A11, A.A12, A.A12, A.A22;
    const Real LA = lie_derivative_tangent(md, theta).cwiseProduct(Am).sum();
    const Real Lvv = lie_derivative_vv(md.alpha, md.beta, md.eta, theta);
    const Real tr = assembly_trace(build_assembly_workspace(s, r0, theta));
    const Real T = theta;
    return Real(2) * (A.norm2() - Real(2)) * T * T + Real(2) * T * tr - Real(2) * T * LA + Real(2) * T * c * Lvv;
}

} // namespace afm
