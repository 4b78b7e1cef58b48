#pragma once
#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "afm/errors.hpp"
#include "afm/field_domain.hpp"
#include "afm/graph_flow.hpp"

namespace afm {

template <class Real = double>
struct EpsilonGate {
    Real eps_max{};
    Real lambda_gate{};
};

template <class Real>
void require_eps1(Real eps1) {
    if (!(eps1 > Real(0)) || !(eps1 < Real(2))) throw std::domain_error("eps1 outside (0, 2)");
}

template <class Real>
EpsilonGate<Real> epsilon_gate(Real eps1) {
    using std::sqrt;
    require_eps1(eps1);
    const Real q = Real(1) + eps1 / Real(16);
    EpsilonGate<Real> g;
    g.lambda_gate = sqrt(eps1) / Real(12);
    g.eps_max = std::min({Real(1) - Real(1) / (q * q), g.lambda_gate, Real(7e-6)});
    return g;
}

template <class Real = double>
struct RadiusWindow {
    Real lo{};
    Real hi{};
};

// left end of the admissible starting-slice window
template <class Real>
Real initial_radius_left(Real c, Real lambda_max) {
    using std::atanh;
    const Real l2 = lambda_max * lambda_max;
    return atanh(c / (Real(2) - (Real(2) - c * c / Real(2)) * l2));
}

template <class Real>
RadiusWindow<Real> initial_radius(Real c, Real lambda_max, Real eps, Real eps1) {
    using std::acosh; using std::log; using std::sqrt;
    require_eps1(eps1);
    if (!(c >= Real(0)) || !(c <= Real(2) - eps1 / Real(2))) throw std::domain_error("c outside [0, 2 - eps1/2]");
    if (!(eps > Real(0))) throw std::domain_error("eps must be positive");
    if (!(lambda_max >= Real(0)) || lambda_max > sqrt(eps1) / Real(12))
        throw std::domain_error("lambda_max above sqrt(eps1)/12");
    RadiusWindow<Real> w;
    w.lo = initial_radius_left(c, lambda_max);
    const Real arg = log(eps1 / (eps * (Real(16) + eps1))) / Real(8);
    if (!(arg >= Real(1)))
        throw empty_window("initial radius window empty: right endpoint undefined (log term " + std::to_string(arg) +
                           " < 1)");
    w.hi = acosh(arg) / Real(2);
    if (w.hi < w.lo)
        throw empty_window("initial radius window empty: right endpoint " + std::to_string(w.hi) +
                           " below left endpoint " + std::to_string(w.lo));
    return w;
}

template <class Real = double>
struct PairCertificate {
    Real c{}, c_next{};
    Real g_inv_max{}, g_inv_min{};  // [g_max^-1(dc), g_min^-1(dc)]
    Real lo{}, hi{};                // tilt-corrected, with slack
    Real measured_min{}, measured_max{};
    Real min_theta{};
    bool ordered = false;
    bool inside = false;
};

template <class Real = double>
struct FoliationResult {
    std::vector<Real> c_values;
    std::vector<std::vector<Real>> surfaces;
    std::vector<char> converged;
    std::vector<Real> max_H_err;
    std::vector<Real> min_theta;
    std::vector<std::vector<char>> ordering_ok;  // [i][j]: u_j > u_i everywhere for i < j
    std::vector<PairCertificate<Real>> distance_bounds;
    bool certificate_ok = false;
};

template <class Real = double>
struct SolverConfig {
    RunPolicy<Real> run;
    Real slack = Real(1e-6);
    bool warm_start = true;
};

// principal curvatures of a converged graph at every node, deduplicated
template <class Real>
std::vector<std::pair<Real, Real>> surface_curvatures(const BaseGrid<Real>& g, const std::vector<Real>& u) {
    std::vector<std::pair<Real, Real>> out;
    out.reserve(g.size());
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const std::size_t k = g.index(i, j);
            const auto ng = node_geometry(g.samples[k], u[k], stencil_at(g, u, i, j));
            const auto kk = principal_curvatures(ng);
            if (!(std::abs(kk[0]) < Real(1)) || !(std::abs(kk[1]) < Real(1)))
                throw std::domain_error("surface principal curvature reached 1 at node " + std::to_string(k));
            out.emplace_back(kk[0], kk[1]);
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// inverse of r -> int_0^r rate(s) ds at value dc
template <class Real, class Rate>
Real invert_integrated_rate(Rate rate, Real dc) {
    using boost::math::quadrature::gauss_kronrod;
    if (dc <= Real(0)) return Real(0);
    auto G = [&](Real r) { return gauss_kronrod<Real, 15>::integrate(rate, Real(0), r, 10, Real(1e-13)) - dc; };
    Real hi = Real(0.125);
    while (G(hi) < Real(0)) {
        hi *= Real(2);
        if (hi > Real(max_abs_radius)) throw std::domain_error("separation integral never reaches dc");
    }
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(G, Real(0), hi, boost::math::tools::eps_tolerance<Real>(), iters);
    return (r.first + r.second) / Real(2);
}

template <class Real>
MonitorReport<Real> ordering_certificate(const BaseGrid<Real>& g, FoliationResult<Real>& res, Real slack) {
    MonitorReport<Real> rep;
    rep.name = "ordering";
    const std::size_t N = res.surfaces.size();
    if (N < 2) throw std::invalid_argument("ordering certificate needs two surfaces");
    res.ordering_ok.assign(N, std::vector<char>(N, 0));
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j) {
            bool ok = true;
            for (std::size_t k = 0; k < g.size() && ok; ++k) ok = res.surfaces[j][k] > res.surfaces[i][k];
            res.ordering_ok[i][j] = ok;
        }
    res.distance_bounds.clear();
    for (std::size_t i = 0; i + 1 < N; ++i) {
        PairCertificate<Real> pc;
        pc.c = res.c_values[i];
        pc.c_next = res.c_values[i + 1];
        const auto& ua = res.surfaces[i];
        const auto& ub = res.surfaces[i + 1];
        const auto curv = surface_curvatures(g, ua);
        auto rate_min = [&](Real s) {
            Real m = std::numeric_limits<Real>::infinity();
            for (const auto& [l1, l2] : curv) m = std::min(m, mean_curvature_rate(l1, l2, s));
            return m;
        };
        auto rate_max = [&](Real s) {
            Real m = 0;
            for (const auto& [l1, l2] : curv) m = std::max(m, mean_curvature_rate(l1, l2, s));
            return m;
        };
        const Real dc = pc.c_next - pc.c;
        pc.g_inv_max = invert_integrated_rate<Real>(rate_max, dc);
        pc.g_inv_min = invert_integrated_rate<Real>(rate_min, dc);
        pc.min_theta = std::min(res.min_theta[i], res.min_theta[i + 1]);
        pc.lo = pc.g_inv_max * pc.min_theta - slack;
        pc.hi = pc.g_inv_min / pc.min_theta + slack;
        pc.measured_min = std::numeric_limits<Real>::infinity();
        pc.measured_max = -std::numeric_limits<Real>::infinity();
        for (std::size_t k = 0; k < g.size(); ++k) {
            pc.measured_min = std::min(pc.measured_min, ub[k] - ua[k]);
            pc.measured_max = std::max(pc.measured_max, ub[k] - ua[k]);
        }
        pc.ordered = res.ordering_ok[i][i + 1] != 0 || dc == Real(0);
        pc.inside = pc.measured_min >= pc.lo && pc.measured_max <= pc.hi;
        rep.check(pc.ordered, i, pc.c, 0, pc.measured_min, "surfaces not strictly ordered");
        rep.check(pc.inside, i, pc.c, 0, std::min(pc.measured_min - pc.lo, pc.hi - pc.measured_max),
                  "separation outside distance interval");
        res.distance_bounds.push_back(pc);
    }
    res.certificate_ok = !rep.failed();
    return rep;
}

template <class Real>
void require_c_list(const std::vector<Real>& cs, Real eps1) {
    require_eps1(eps1);
    for (std::size_t k = 0; k < cs.size(); ++k) {
        if (!(cs[k] >= Real(0)) || !(cs[k] <= Real(2) - eps1 / Real(2)))
            throw std::domain_error("c value outside [0, 2 - eps1/2]");
        if (k > 0 && !(cs[k] > cs[k - 1])) throw std::domain_error("c values must be ascending");
    }
}

template <class Real>
std::vector<Real> linear_c_grid(Real c_min, Real c_max, int count) {
    std::vector<Real> v;
    if (count == 1) return {c_min};
    for (int k = 0; k < count; ++k) v.push_back(c_min + (c_max - c_min) * Real(k) / Real(count - 1));
    return v;
}

// gaps shrink geometrically towards c_max = 2 - eps1/2
template <class Real>
std::vector<Real> default_c_grid(Real eps1, int count = 16, Real ratio = Real(0.8)) {
    using std::pow;
    const Real c_max = Real(2) - eps1 / Real(2);
    std::vector<Real> v;
    const Real denom = Real(1) - pow(ratio, Real(count - 1));
    for (int k = 0; k < count; ++k) v.push_back(c_max * (Real(1) - pow(ratio, Real(k))) / denom);
    return v;
}

template <class Real>
FoliationResult<Real> sweep_cmc(const BaseGrid<Real>& g, const std::vector<Real>& c_list, Real eps1,
                                const SolverConfig<Real>& cfg) {
    require_c_list(c_list, eps1);
    const Real lmax = g.lambda_max();
    FoliationResult<Real> res;
    const std::size_t N = c_list.size();
    res.c_values = c_list;
    res.surfaces.resize(N);
    res.converged.assign(N, 0);
    res.max_H_err.assign(N, Real(0));
    res.min_theta.assign(N, Real(1));
    auto solve = [&](std::size_t k, std::vector<Real> u0) {
        RunPolicy<Real> p = cfg.run;
        if (!cfg.warm_start) p.threads = 1;
        auto run = run_to_convergence(make_graph_state(g, std::move(u0), c_list[k], p.threads), p);
        res.converged[k] = run.converged;
        res.max_H_err[k] = max_abs_H_minus_c(run.state);
        res.min_theta[k] = *std::min_element(run.state.theta.begin(), run.state.theta.end());
        res.surfaces[k] = std::move(run.state.u);
    };
    if (cfg.warm_start) {
        for (std::size_t k = 0; k < N; ++k)
            solve(k, k == 0 ? slice_height(g, initial_radius_left(c_list[0], lmax)) : res.surfaces[k - 1]);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(N);
        for (std::size_t k = 0; k < N; ++k)
            pool.emplace_back([&, k] {
                try {
                    solve(k, slice_height(g, initial_radius_left(c_list[k], lmax)));
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    if (N >= 2) ordering_certificate(g, res, cfg.slack);
    return res;
}

} // namespace afm
