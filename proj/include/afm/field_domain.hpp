#pragma once
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "afm/errors.hpp"
#include "afm/point_geometry.hpp"

namespace afm {

enum class GridMode { periodic, patch };

inline std::string to_string(GridMode m) { return m == GridMode::periodic ? "periodic" : "patch"; }

inline GridMode parse_grid_mode(const std::string& s) {
    if (s == "periodic") return GridMode::periodic;
    if (s == "patch") return GridMode::patch;
    throw std::invalid_argument("unknown grid mode: " + s);
}

// Node (i, j) sits at (x0 + i hx, y0 + j hy); storage is row-major in i.
template <class Real = double>
struct BaseGrid {
    int nx = 0, ny = 0;
    Real lx{}, ly{};
    GridMode mode = GridMode::periodic;
    Real x0{}, y0{};
    std::vector<ShapeSample<Real>> samples;
    bool approximate_codazzi = false;

    std::size_t size() const { return samples.size(); }
    std::size_t index(int i, int j) const { return std::size_t(i) * std::size_t(ny) + std::size_t(j); }
    const ShapeSample<Real>& at(int i, int j) const { return samples[index(i, j)]; }
    ShapeSample<Real>& at(int i, int j) { return samples[index(i, j)]; }

    Real hx() const { return mode == GridMode::periodic ? lx / Real(nx) : lx / Real(nx - 1); }
    Real hy() const { return mode == GridMode::periodic ? ly / Real(ny) : ly / Real(ny - 1); }
    Real x(int i) const { return x0 + Real(i) * hx(); }
    Real y(int j) const { return y0 + Real(j) * hy(); }

    Real lambda_max() const {
        Real l = 0;
        for (const auto& s : samples) l = std::max(l, s.lambda());
        return l;
    }
};

namespace detail {

template <class Real>
void check_dims(int nx, int ny, Real lx, Real ly, int min_n) {
    if (nx < min_n || ny < min_n) throw std::invalid_argument("grid needs at least 3 nodes per axis");
    if (!(lx > 0) || !(ly > 0)) throw std::invalid_argument("grid lengths must be positive");
}

} // namespace detail

template <class Real>
BaseGrid<Real> make_constant_field(Real a, Real b, int nx, int ny, Real lx, Real ly) {
    detail::check_dims(nx, ny, lx, ly, 3);
    ShapeSample<Real> s{a, b, Real(0), Real(0)};
    require_almost_fuchsian(s);
    BaseGrid<Real> g;
    g.nx = nx; g.ny = ny; g.lx = lx; g.ly = ly;
    g.mode = GridMode::periodic;
    g.samples.assign(std::size_t(nx) * std::size_t(ny), s);
    return g;
}

template <class Real>
std::complex<Real> eval_poly(const std::vector<std::complex<Real>>& c, std::complex<Real> z) {
    std::complex<Real> p{};
    for (auto it = c.rbegin(); it != c.rend(); ++it) p = p * z + *it;
    return p;
}

template <class Real>
std::vector<std::complex<Real>> derive_poly(const std::vector<std::complex<Real>>& c) {
    std::vector<std::complex<Real>> d;
    for (std::size_t k = 1; k < c.size(); ++k) d.push_back(c[k] * Real(k));
    return d;
}

// a - i b = p(z): a = Re p, b = -Im p, m = Re p', n = -Im p'
template <class Real>
ShapeSample<Real> holomorphic_sample(const std::vector<std::complex<Real>>& coeffs,
                                     const std::vector<std::complex<Real>>& dcoeffs,
                                     std::complex<Real> z) {
    const auto p = eval_poly(coeffs, z);
    const auto dp = eval_poly(dcoeffs, z);
    return {p.real(), -p.imag(), dp.real(), -dp.imag()};
}

// coefficients[k] multiplies z^k; the patch is [x0, x0 + lx] x [y0, y0 + ly] with both ends as nodes
template <class Real>
BaseGrid<Real> make_holomorphic_patch(const std::vector<std::complex<Real>>& coefficients,
                                      int nx, int ny, Real x0, Real y0, Real lx, Real ly) {
    detail::check_dims(nx, ny, lx, ly, 3);
    const auto dc = derive_poly(coefficients);
    const int dense = 4;
    for (int i = 0; i <= dense * (nx - 1); ++i)
        for (int j = 0; j <= dense * (ny - 1); ++j) {
            const std::complex<Real> z(x0 + lx * Real(i) / Real(dense * (nx - 1)),
                                       y0 + ly * Real(j) / Real(dense * (ny - 1)));
            if (!(std::abs(eval_poly(coefficients, z)) < Real(1)))
                throw std::domain_error("holomorphic patch violates |p| < 1");
        }
    BaseGrid<Real> g;
    g.nx = nx; g.ny = ny; g.lx = lx; g.ly = ly; g.x0 = x0; g.y0 = y0;
    g.mode = GridMode::patch;
    g.samples.resize(std::size_t(nx) * std::size_t(ny));
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            g.at(i, j) = holomorphic_sample(coefficients, dc, std::complex<Real>(g.x(i), g.y(j)));
    return g;
}

// differences along one axis: central inside, 2nd-order one-sided at patch edges
template <class Real, class Get>
Real axis_derivative(const BaseGrid<Real>& g, int i, int j, int axis, Get get) {
    const int n = axis == 0 ? g.nx : g.ny;
    const Real h = axis == 0 ? g.hx() : g.hy();
    const int k = axis == 0 ? i : j;
    auto val = [&](int kk) {
        if (g.mode == GridMode::periodic) kk = ((kk % n) + n) % n;
        return axis == 0 ? get(g.at(kk, j)) : get(g.at(i, kk));
    };
    if (g.mode == GridMode::periodic || (k > 0 && k < n - 1))
        return (val(k + 1) - val(k - 1)) / (Real(2) * h);
    if (k == 0) return (-Real(3) * val(0) + Real(4) * val(1) - val(2)) / (Real(2) * h);
    return (Real(3) * val(n - 1) - Real(4) * val(n - 2) + val(n - 3)) / (Real(2) * h);
}

template <class Real>
Real codazzi_residual(const BaseGrid<Real>& g) {
    auto geta = [](const ShapeSample<Real>& s) { return s.a; };
    auto getb = [](const ShapeSample<Real>& s) { return s.b; };
    Real worst = 0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const Real a1 = axis_derivative(g, i, j, 0, geta), a2 = axis_derivative(g, i, j, 1, geta);
            const Real b1 = axis_derivative(g, i, j, 0, getb), b2 = axis_derivative(g, i, j, 1, getb);
            worst = std::max(worst, std::abs(a1 + b2) + std::abs(a2 - b1));
        }
    return worst;
}

// periodic field from (a, b) samples; stores m = d1 a, n = d2 a by central differences
template <class Real>
BaseGrid<Real> make_periodic_field(const std::function<std::pair<Real, Real>(Real, Real)>& ab,
                                   int nx, int ny, Real lx, Real ly) {
    detail::check_dims(nx, ny, lx, ly, 3);
    BaseGrid<Real> g;
    g.nx = nx; g.ny = ny; g.lx = lx; g.ly = ly;
    g.mode = GridMode::periodic;
    g.samples.resize(std::size_t(nx) * std::size_t(ny));
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            auto [a, b] = ab(g.x(i), g.y(j));
            g.at(i, j) = {a, b, Real(0), Real(0)};
            require_almost_fuchsian(g.at(i, j));
        }
    auto geta = [](const ShapeSample<Real>& s) { return s.a; };
    std::vector<std::pair<Real, Real>> mn(g.size());
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            mn[g.index(i, j)] = {axis_derivative(g, i, j, 0, geta), axis_derivative(g, i, j, 1, geta)};
    for (std::size_t k = 0; k < g.size(); ++k) {
        g.samples[k].m = mn[k].first;
        g.samples[k].n = mn[k].second;
    }
    g.approximate_codazzi = codazzi_residual(g) > Real(1e-10);
    return g;
}

// text format: "nx ny lx ly mode" then "i j a b m n [u]" per node
template <class Real>
void write_grid(std::ostream& os, const BaseGrid<Real>& g, const std::vector<Real>* u = nullptr) {
    os << std::setprecision(std::numeric_limits<Real>::max_digits10);
    os << g.nx << ' ' << g.ny << ' ' << g.lx << ' ' << g.ly << ' ' << to_string(g.mode) << '\n';
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const auto& s = g.at(i, j);
            os << i << ' ' << j << ' ' << s.a << ' ' << s.b << ' ' << s.m << ' ' << s.n;
            if (u) os << ' ' << (*u)[g.index(i, j)];
            os << '\n';
        }
}

template <class Real = double>
struct GridFile {
    BaseGrid<Real> grid;
    std::vector<Real> u;  // empty unless every node line carries a height
};

template <class Real = double>
GridFile<Real> read_grid(std::istream& is) {
    GridFile<Real> f;
    auto& g = f.grid;
    std::string line, mode;
    if (!std::getline(is, line)) throw std::invalid_argument("grid file: missing header");
    {
        std::istringstream hs(line);
        if (!(hs >> g.nx >> g.ny >> g.lx >> g.ly >> mode)) throw std::invalid_argument("grid file: bad header");
    }
    g.mode = parse_grid_mode(mode);
    detail::check_dims(g.nx, g.ny, g.lx, g.ly, 3);
    g.samples.resize(std::size_t(g.nx) * std::size_t(g.ny));
    std::vector<Real> u(g.size(), Real(0));
    std::vector<char> seen(g.size(), 0);
    std::size_t with_u = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!std::getline(is, line)) throw std::invalid_argument("grid file: truncated");
        std::istringstream ls(line);
        int i, j;
        ShapeSample<Real> s;
        if (!(ls >> i >> j >> s.a >> s.b >> s.m >> s.n)) throw std::invalid_argument("grid file: bad node line");
        if (i < 0 || i >= g.nx || j < 0 || j >= g.ny) throw std::invalid_argument("grid file: node out of range");
        require_almost_fuchsian(s);
        g.at(i, j) = s;
        seen[g.index(i, j)] = 1;
        Real h;
        if (ls >> h) { u[g.index(i, j)] = h; ++with_u; }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw std::invalid_argument("grid file: missing nodes");
    if (with_u == g.size()) f.u = std::move(u);
    if (g.mode == GridMode::periodic) g.approximate_codazzi = codazzi_residual(g) > Real(1e-10);
    return f;
}

} // namespace afm
