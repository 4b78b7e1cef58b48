#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "afm/errors.hpp"
#include "afm/field_domain.hpp"
#include "afm/point_geometry.hpp"

namespace afm {

// runs fn(i_begin, i_end) over row blocks; every node is written by exactly one block
template <class Fn>
void parallel_rows(int nx, int threads, Fn&& fn) {
    if (threads <= 1 || nx < 2) {
        fn(0, nx);
        return;
    }
    const int nt = std::min(threads, nx);
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(nt));
    for (int k = 0; k < nt; ++k) {
        const int b = nx * k / nt, e = nx * (k + 1) / nt;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& t : pool) t.join();
}

template <class Real = double>
struct Stencil {
    Real ux{}, uy{}, uxx{}, uxy{}, uyy{};
};

template <class Real>
void require_periodic(const BaseGrid<Real>& g) {
    if (g.mode != GridMode::periodic) throw std::invalid_argument("graph flow needs a periodic grid");
}

template <class Real>
Stencil<Real> stencil_at(const BaseGrid<Real>& g, const std::vector<Real>& u, int i, int j) {
    const int ip = (i + 1) % g.nx, im = (i + g.nx - 1) % g.nx;
    const int jp = (j + 1) % g.ny, jm = (j + g.ny - 1) % g.ny;
    const Real hx = g.hx(), hy = g.hy();
    auto U = [&](int a, int b) { return u[g.index(a, b)]; };
    const Real c = U(i, j);
    Stencil<Real> d;
    d.ux = (U(ip, j) - U(im, j)) / (Real(2) * hx);
    d.uy = (U(i, jp) - U(i, jm)) / (Real(2) * hy);
    d.uxx = (U(ip, j) - Real(2) * c + U(im, j)) / (hx * hx);
    d.uyy = (U(i, jp) - Real(2) * c + U(i, jm)) / (hy * hy);
    d.uxy = (U(ip, jp) - U(ip, jm) - U(im, jp) + U(im, jm)) / (Real(4) * hx * hy);
    return d;
}

template <class Real = double>
struct NodeGeometry {
    Real theta{};
    Real H{};
    Mat2<Real> ghat;
    Mat2<Real> ghat_inv;
    Mat2<Real> h;
    Real trace_term{};  // (1/2) ghat^ij d_r g_ij, equal to Laplacian(u) + H theta
};

// graph x -> (x, u(x)); h_ij oriented so level surfaces at r > 0 have H = alpha + eta > 0
template <class Real>
NodeGeometry<Real> node_geometry(const ShapeSample<Real>& s, Real u, const Stencil<Real>& d) {
    using std::sqrt;
    const MetricData<Real> md = build_metric_data(s, u);
    const ChristoffelSet<Real> cs = christoffels(s, md);
    const Vec2<Real> du(d.ux, d.uy);
    const Vec2<Real> gdu = md.ginv * du;
    const Real W2 = Real(1) + du.dot(gdu);
    const Real W = sqrt(W2);

    NodeGeometry<Real> ng;
    ng.theta = Real(1) / W;
    ng.ghat = md.g + du * du.transpose();
    ng.ghat_inv = md.ginv - gdu * gdu.transpose() / W2;
    const Real det = ng.ghat.determinant();
    if (!(det > Real(0)) || !std::isfinite(det)) throw singular_metric("induced metric lost positive definiteness");

    Mat2<Real> hess;
    hess << d.uxx, d.uxy, d.uxy, d.uyy;
    hess -= cs.B * du(0) + cs.C * du(1);
    const Vec2<Real> Fdu = md.F() * du;
    ng.h = (md.Ar - hess + du * Fdu.transpose() + Fdu * du.transpose()) / W;
    ng.H = (ng.ghat_inv * ng.h).trace();
    ng.trace_term = (ng.ghat_inv * md.Ar).trace();
    return ng;
}

// eigenvalues of the shape operator ghat^-1 h, larger first
template <class Real>
std::array<Real, 2> principal_curvatures(const NodeGeometry<Real>& ng) {
    using std::sqrt;
    const Mat2<Real> S = ng.ghat_inv * ng.h;
    const Real half = S.trace() / Real(2);
    const Real disc = std::max(Real(0), half * half - S.determinant());
    return {half + sqrt(disc), half - sqrt(disc)};
}

template <class Real = double>
struct GraphGeometry {
    std::vector<Real> theta;
    std::vector<Real> H;
    std::vector<Real> ghat11, ghat12, ghat22;
};

template <class Real>
GraphGeometry<Real> graph_geometry(const BaseGrid<Real>& g, const std::vector<Real>& u, int threads = 1) {
    require_periodic(g);
    if (u.size() != g.size()) throw std::invalid_argument("height field size mismatch");
    GraphGeometry<Real> out;
    out.theta.resize(g.size());
    out.H.resize(g.size());
    out.ghat11.resize(g.size());
    out.ghat12.resize(g.size());
    out.ghat22.resize(g.size());
    parallel_rows(g.nx, threads, [&](int b, int e) {
        for (int i = b; i < e; ++i)
            for (int j = 0; j < g.ny; ++j) {
                const std::size_t k = g.index(i, j);
                const NodeGeometry<Real> ng = node_geometry(g.samples[k], u[k], stencil_at(g, u, i, j));
                out.theta[k] = ng.theta;
                out.H[k] = ng.H;
                out.ghat11[k] = ng.ghat(0, 0);
                out.ghat12[k] = ng.ghat(0, 1);
                out.ghat22[k] = ng.ghat(1, 1);
            }
    });
    return out;
}

// Laplace-Beltrami of u on its own graph, (1/(detE W)) d_i(detE g^ij u_j / W), central differences
template <class Real>
std::vector<Real> graph_laplacian(const BaseGrid<Real>& g, const std::vector<Real>& u) {
    require_periodic(g);
    std::vector<Real> q1(g.size()), q2(g.size()), scale(g.size());
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const std::size_t k = g.index(i, j);
            const Stencil<Real> d = stencil_at(g, u, i, j);
            const MetricData<Real> md = build_metric_data(g.samples[k], u[k]);
            const Vec2<Real> du(d.ux, d.uy);
            const Vec2<Real> gdu = md.ginv * du;
            const Real W = std::sqrt(Real(1) + du.dot(gdu));
            q1[k] = md.detE * gdu(0) / W;
            q2[k] = md.detE * gdu(1) / W;
            scale[k] = md.detE * W;
        }
    std::vector<Real> lap(g.size());
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const Real d1 = (q1[g.index((i + 1) % g.nx, j)] - q1[g.index((i + g.nx - 1) % g.nx, j)]) / (Real(2) * g.hx());
            const Real d2 = (q2[g.index(i, (j + 1) % g.ny)] - q2[g.index(i, (j + g.ny - 1) % g.ny)]) / (Real(2) * g.hy());
            lap[g.index(i, j)] = (d1 + d2) / scale[g.index(i, j)];
        }
    return lap;
}

// right-hand side of Laplacian(u) + H theta in the symmetric frame
template <class Real>
Real equation_u_rhs(const ShapeSample<Real>& s, Real u, Real theta) {
    using std::cosh; using std::sinh;
    const Real w = Real(1) - s.lambda2();
    const Real ch = cosh(u), sh = sinh(u);
    const Real t2 = theta * theta;
    return (w * (t2 + Real(1)) * ch * sh + s.b * (t2 - Real(1))) / (Real(1) + w * sh * sh);
}

template <class Real = double>
struct GraphState {
    const BaseGrid<Real>* grid = nullptr;
    std::vector<Real> u;
    Real t{};
    Real c{};
    std::vector<Real> theta;
    std::vector<Real> H;
};

template <class Real>
void require_target(Real c) {
    if (!(c >= Real(0)) || !(c < Real(2))) throw std::domain_error("target mean curvature outside [0, 2)");
}

template <class Real>
GraphState<Real> make_graph_state(const BaseGrid<Real>& g, std::vector<Real> u0, Real c, int threads = 1) {
    require_target(c);
    GraphState<Real> s;
    s.grid = &g;
    s.u = std::move(u0);
    s.c = c;
    auto geo = graph_geometry(g, s.u, threads);
    s.theta = std::move(geo.theta);
    s.H = std::move(geo.H);
    return s;
}

template <class Real>
std::vector<Real> slice_height(const BaseGrid<Real>& g, Real r) {
    return std::vector<Real>(g.size(), r);
}

inline constexpr double default_kappa = 0.2;

// explicit limit dt <= kappa h^2 / max eig(g^-1(x, u))
template <class Real>
Real stability_cap(const BaseGrid<Real>& g, const std::vector<Real>& u, Real kappa = Real(default_kappa)) {
    using std::cosh; using std::sinh; using std::abs;
    Real worst = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        require_radius(u[k]);
        const Real emin = cosh(u[k]) - g.samples[k].lambda() * abs(sinh(u[k]));
        worst = std::max(worst, Real(1) / (emin * emin));
    }
    const Real h = std::min(g.hx(), g.hy());
    return kappa * h * h / worst;
}

template <class Real>
std::vector<Real> flow_speed(const GraphState<Real>& s) {
    std::vector<Real> v(s.u.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = -(s.H[k] - s.c) * s.theta[k];
    return v;
}

// one Heun (RK2) step of u_t = -(H - c) theta
template <class Real>
GraphState<Real> step_mmcf(const GraphState<Real>& s, Real dt, int threads = 1, Real kappa = Real(default_kappa)) {
    const BaseGrid<Real>& g = *s.grid;
    if (!(dt > Real(0))) throw std::invalid_argument("time step must be positive");
    if (dt > stability_cap(g, s.u, kappa)) throw stability_error("time step exceeds stability cap");
    const std::vector<Real> k1 = flow_speed(s);
    std::vector<Real> u1(s.u.size());
    for (std::size_t k = 0; k < u1.size(); ++k) u1[k] = s.u[k] + dt * k1[k];
    GraphState<Real> mid = make_graph_state(g, std::move(u1), s.c, threads);
    const std::vector<Real> k2 = flow_speed(mid);
    std::vector<Real> un(s.u.size());
    for (std::size_t k = 0; k < un.size(); ++k) un[k] = s.u[k] + dt / Real(2) * (k1[k] + k2[k]);
    GraphState<Real> out = make_graph_state(g, std::move(un), s.c, threads);
    out.t = s.t + dt;
    return out;
}

template <class Real = double>
struct CriticalRadii {
    Real r_c{};
    Real r_tilde{};
    Real r_hat{};
    Real b_tilde{};
};

template <class Real>
CriticalRadii<Real> critical_radii(Real c, Real lambda_max, Real b0) {
    using std::atanh; using std::tanh; using std::sqrt;
    require_target(c);
    if (!(lambda_max >= Real(0)) || !(lambda_max < Real(1))) throw std::domain_error("lambda_max outside [0, 1)");
    const Real l2 = lambda_max * lambda_max;
    CriticalRadii<Real> r;
    r.r_c = atanh(c / Real(2));
    r.b_tilde = std::min(b0, r.r_c);
    const Real tt = c / (Real(2) - (Real(2) - c * tanh(r.b_tilde)) * l2);
    if (!(tt < Real(1)) || !(tt >= Real(0))) throw std::domain_error("r~_c undefined for this lambda_max");
    r.r_tilde = atanh(tt);
    const Real w = Real(1) - l2;
    r.r_hat = atanh(c / (w + sqrt(w * w + c * c * l2)));
    return r;
}

template <class Real = double>
struct FlowRecord {
    Real t{};
    Real w{}, v{};
    std::size_t w_node = 0, v_node = 0;
    Real min_theta{};
    Real max_abs_H_minus_c{};
    Real min_H_minus_c{};
};

template <class Real>
FlowRecord<Real> make_record(const GraphState<Real>& s) {
    FlowRecord<Real> r;
    r.t = s.t;
    const auto [mn, mx] = std::minmax_element(s.u.begin(), s.u.end());
    r.w = *mn;
    r.v = *mx;
    r.w_node = std::size_t(mn - s.u.begin());
    r.v_node = std::size_t(mx - s.u.begin());
    r.min_theta = *std::min_element(s.theta.begin(), s.theta.end());
    r.max_abs_H_minus_c = 0;
    r.min_H_minus_c = std::numeric_limits<Real>::infinity();
    for (Real h : s.H) {
        r.max_abs_H_minus_c = std::max(r.max_abs_H_minus_c, std::abs(h - s.c));
        r.min_H_minus_c = std::min(r.min_H_minus_c, h - s.c);
    }
    return r;
}

template <class Real = double>
struct Violation {
    std::size_t step = 0;
    Real t{};
    std::size_t node = 0;
    Real margin{};
    std::string what;
};

// precondition false: hypotheses fail at t = 0, violations are informational
template <class Real = double>
struct MonitorReport {
    std::string name;
    bool precondition = true;
    std::vector<Violation<Real>> violations;
    Real worst_margin = std::numeric_limits<Real>::infinity();

    bool failed() const { return precondition && !violations.empty(); }

    void check(bool holds, std::size_t step, Real t, std::size_t node, Real margin, const char* what) {
        worst_margin = std::min(worst_margin, margin);
        if (!holds) violations.push_back({step, t, node, margin, what});
    }
};

template <class Real>
Real envelope_value(Real t, Real T1, Real start, Real center, Real tau) {
    using std::asinh; using std::exp; using std::sinh;
    return asinh(exp(-tau * (t - T1)) * sinh(start - center)) + center;
}

template <class Real = double>
struct HeightEnvelope {
    CriticalRadii<Real> radii;
    Real tau1{}, tau2{};
    std::vector<Real> w_series, v_series;
    std::vector<Real> lower, upper;  // envelopes started at the first record
    MonitorReport<Real> report;
};

template <class Real>
Real lower_tau(Real w1, Real r_c, Real c) { return w1 >= r_c ? Real(4) : (Real(2) - c) / Real(4); }

template <class Real>
Real upper_tau(Real v1, Real r_tilde, Real c) { return v1 <= r_tilde ? Real(4) : (Real(2) - c) / Real(4); }

// envelopes from every record T1 onwards plus the static sandwich
template <class Real>
HeightEnvelope<Real> height_envelope_monitor(const std::vector<FlowRecord<Real>>& hist, Real c, Real lambda_max,
                                             Real slack) {
    HeightEnvelope<Real> env;
    env.report.name = "height_envelope";
    if (hist.empty()) return env;
    const Real b0 = hist.front().w, a0 = hist.front().v;
    env.report.precondition = lambda_max <= std::sqrt(Real(2) - c) / Real(2) && b0 > Real(0);
    env.radii = critical_radii(c, lambda_max, b0);
    const auto& R = env.radii;
    const std::size_t N = hist.size();
    for (const auto& r : hist) {
        env.w_series.push_back(r.w);
        env.v_series.push_back(r.v);
    }
    env.tau1 = lower_tau(hist.front().w, R.r_c, c);
    env.tau2 = upper_tau(hist.front().v, R.r_tilde, c);
    for (std::size_t k = 0; k < N; ++k) {
        env.lower.push_back(envelope_value(hist[k].t, hist.front().t, hist.front().w, R.r_c, env.tau1));
        env.upper.push_back(envelope_value(hist[k].t, hist.front().t, hist.front().v, R.r_tilde, env.tau2));
    }
    const Real top = std::max(a0, R.r_tilde);
    for (std::size_t k = 0; k < N; ++k) {
        const auto& r = hist[k];
        env.report.check(r.w >= R.b_tilde - slack, k, r.t, r.w_node, r.w - R.b_tilde, "static lower");
        env.report.check(r.v <= top + slack, k, r.t, r.v_node, top - r.v, "static upper");
    }
    for (std::size_t s = 0; s < N; ++s) {
        const Real t1 = lower_tau(hist[s].w, R.r_c, c);
        const Real t2 = upper_tau(hist[s].v, R.r_tilde, c);
        for (std::size_t k = s; k < N; ++k) {
            const auto& r = hist[k];
            const Real lo = envelope_value(r.t, hist[s].t, hist[s].w, R.r_c, t1);
            const Real hi = envelope_value(r.t, hist[s].t, hist[s].v, R.r_tilde, t2);
            env.report.check(r.w >= lo - slack, k, r.t, r.w_node, r.w - lo, "lower envelope");
            env.report.check(r.v <= hi + slack, k, r.t, r.v_node, hi - r.v, "upper envelope");
        }
    }
    return env;
}

template <class Real>
MonitorReport<Real> mean_convex_monitor(const std::vector<FlowRecord<Real>>& hist, Real slack,
                                        Real v_slack = Real(1e-8)) {
    using std::exp;
    MonitorReport<Real> rep;
    rep.name = "mean_convex";
    if (hist.empty()) return rep;
    const Real h0 = hist.front().min_H_minus_c;
    rep.precondition = h0 >= -Real(1e-12);
    for (std::size_t k = 1; k < hist.size(); ++k) {
        const auto& r = hist[k];
        rep.check(r.v <= hist[k - 1].v + v_slack, k, r.t, r.v_node, hist[k - 1].v - r.v, "max height increased");
        const Real floor = exp(-Real(2) * (r.t - hist.front().t)) * h0;
        rep.check(r.min_H_minus_c >= floor - slack, k, r.t, 0, r.min_H_minus_c - floor, "H - c below decay floor");
    }
    return rep;
}

template <class Real>
MonitorReport<Real> angle_monitor(const std::vector<FlowRecord<Real>>& hist, Real eps1, bool precondition = true) {
    MonitorReport<Real> rep;
    rep.name = "angle";
    rep.precondition = precondition;
    const Real bound = Real(1) / (Real(1) + eps1 / Real(8));
    for (std::size_t k = 0; k < hist.size(); ++k)
        rep.check(hist[k].min_theta >= bound, k, hist[k].t, 0, hist[k].min_theta - bound, "angle below bound");
    return rep;
}

template <class Real>
Real fuchsian_rhs(Real w, Real c, Real lambda) {
    using std::tanh;
    const Real l2 = lambda * lambda;
    const Real th = tanh(w);
    return -Real(2) * (Real(1) - l2) * th / (Real(1) - l2 * th * th) + c;
}

template <class Real = double>
struct OdeSeries {
    Real c{}, lambda{};
    std::vector<Real> t, w;
    Real w_star{};

    // cubic Hermite between stored steps
    Real at(Real tq) const {
        if (tq <= t.front()) return w.front();
        if (tq >= t.back()) return w.back();
        const auto it = std::upper_bound(t.begin(), t.end(), tq);
        const std::size_t k = std::size_t(it - t.begin()) - 1;
        const Real h = t[k + 1] - t[k], s = (tq - t[k]) / h;
        const Real f0 = fuchsian_rhs(w[k], c, lambda) * h, f1 = fuchsian_rhs(w[k + 1], c, lambda) * h;
        const Real s2 = s * s, s3 = s2 * s;
        return (Real(2) * s3 - Real(3) * s2 + Real(1)) * w[k] + (s3 - Real(2) * s2 + s) * f0
             + (-Real(2) * s3 + Real(3) * s2) * w[k + 1] + (s3 - s2) * f1;
    }
};

// equilibrium of the scalar height ODE by bracketing root finding
template <class Real>
Real fuchsian_fixed_point(Real c, Real lambda) {
    if (c == Real(0)) return Real(0);
    auto f = [&](Real w) { return fuchsian_rhs(w, c, lambda); };
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, Real(0), Real(max_abs_radius),
                                                     boost::math::tools::eps_tolerance<Real>(), iters);
    return (r.first + r.second) / Real(2);
}

template <class Real>
OdeSeries<Real> fuchsian_ode(Real c, Real lambda, Real w0, Real t_end, Real dt) {
    namespace odeint = boost::numeric::odeint;
    require_target(c);
    if (!(lambda >= Real(0)) || !(lambda < Real(1))) throw std::domain_error("lambda outside [0, 1)");
    if (!(dt > Real(0)) || !(t_end >= Real(0))) throw std::invalid_argument("bad ODE time grid");
    OdeSeries<Real> out;
    out.c = c;
    out.lambda = lambda;
    using State = std::array<Real, 1>;
    State x{w0};
    const std::size_t steps = std::size_t(std::llround(t_end / dt));
    odeint::runge_kutta4<State, Real> rk;
    auto rhs = [&](const State& s, State& ds, Real) { ds[0] = fuchsian_rhs(s[0], c, lambda); };
    out.t.push_back(0);
    out.w.push_back(w0);
    for (std::size_t k = 0; k < steps; ++k) {
        rk.do_step(rhs, x, Real(k) * dt, dt);
        out.t.push_back(Real(k + 1) * dt);
        out.w.push_back(x[0]);
    }
    out.w_star = fuchsian_fixed_point(c, lambda);
    return out;
}

template <class Real = double>
struct RunPolicy {
    Real dt = Real(1e-3);
    Real tol = Real(1e-8);
    Real t_max = Real(10);
    Real record_every = Real(0.05);
    Real kappa = Real(default_kappa);
    int threads = 1;
};

template <class Real = double>
struct RunResult {
    GraphState<Real> state;
    bool converged = false;
    std::size_t steps = 0;
    std::vector<FlowRecord<Real>> history;
    std::string reason;
};

template <class Real>
Real max_abs_H_minus_c(const GraphState<Real>& s) {
    Real m = 0;
    for (Real h : s.H) m = std::max(m, std::abs(h - s.c));
    return m;
}

template <class Real>
RunResult<Real> run_to_convergence(GraphState<Real> state, const RunPolicy<Real>& p) {
    RunResult<Real> res;
    res.history.push_back(make_record(state));
    Real next_record = state.t + p.record_every;
    while (true) {
        if (max_abs_H_minus_c(state) < p.tol) {
            res.converged = true;
            res.reason = "max|H-c| below tolerance";
            break;
        }
        if (state.t >= p.t_max) {
            res.reason = "t_max reached";
            break;
        }
        const Real dt = std::min(p.dt, p.t_max - state.t);
        state = step_mmcf(state, dt, p.threads, p.kappa);
        ++res.steps;
        if (state.t >= next_record - Real(1e-12) * p.record_every) {
            res.history.push_back(make_record(state));
            next_record += p.record_every;
        }
    }
    if (res.history.back().t != state.t) res.history.push_back(make_record(state));
    res.state = std::move(state);
    return res;
}

} // namespace afm
