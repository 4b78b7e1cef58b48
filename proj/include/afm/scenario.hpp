#pragma once
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "afm/errors.hpp"
#include "afm/field_domain.hpp"
#include "afm/foliation.hpp"
#include "afm/graph_flow.hpp"
#include "afm/point_geometry.hpp"
#include "afm/theta_engine.hpp"

namespace afm {

// splitmix64 (Steele, Lea, Flood 2014): x += 0x9e3779b97f4a7c15, then two xor-shift-multiply rounds
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // 53 high bits mapped to [0, 1)
    double uniform01() { return double(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::uint64_t state_;
};

// dotted key=value text; '#' starts a comment
class Config {
public:
    struct Entry {
        std::string value;
        int line = 0;
        int column = 0;
    };

    static Config parse(const std::string& text) {
        Config cfg;
        std::istringstream is(text);
        std::string raw;
        int lineno = 0;
        while (std::getline(is, raw)) {
            ++lineno;
            const auto hash = raw.find('#');
            const std::string line = raw.substr(0, hash);
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw config_error("line " + std::to_string(lineno) + ", column " + std::to_string(first + 1) +
                                       ": expected key=value",
                                   lineno, int(first) + 1);
            const std::string key = trim(line.substr(0, eq));
            if (key.empty())
                throw config_error("line " + std::to_string(lineno) + ", column " + std::to_string(first + 1) +
                                       ": empty key",
                                   lineno, int(first) + 1);
            if (key.find_first_of(" \t") != std::string::npos)
                throw config_error("line " + std::to_string(lineno) + ", column " + std::to_string(first + 1) +
                                       ": key contains whitespace",
                                   lineno, int(first) + 1);
            const auto vpos = line.find_first_not_of(" \t", eq + 1);
            const int vcol = int(vpos == std::string::npos ? eq + 2 : vpos + 1);
            if (cfg.entries_.count(key))
                throw config_error("line " + std::to_string(lineno) + ", column " + std::to_string(first + 1) +
                                       ": duplicate key " + key,
                                   lineno, int(first) + 1);
            cfg.entries_[key] = {trim(line.substr(eq + 1)), lineno, vcol};
        }
        return cfg;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw config_error("cannot read config " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    const std::string& get(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) throw config_error("missing key " + key);
        return it->second.value;
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? get(key) : fallback;
    }

    double number(const std::string& key) const {
        const auto& e = entry(key);
        try {
            std::size_t used = 0;
            const double v = std::stod(e.value, &used);
            if (used != e.value.size()) throw std::invalid_argument(key);
            return v;
        } catch (const std::logic_error&) {
            throw config_error("line " + std::to_string(e.line) + ", column " + std::to_string(e.column) +
                                   ": bad number for " + key,
                               e.line, e.column);
        }
    }

    double number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    int integer(const std::string& key) const {
        const double v = number(key);
        if (v != std::floor(v) || std::abs(v) > 1e9) {
            const auto& e = entry(key);
            throw config_error("line " + std::to_string(e.line) + ", column " + std::to_string(e.column) +
                                   ": expected integer for " + key,
                               e.line, e.column);
        }
        return int(v);
    }

    std::uint64_t seed_or(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const auto& e = entry(key);
        try {
            std::size_t used = 0;
            const auto v = std::stoull(e.value, &used, 0);
            if (used != e.value.size() || e.value.front() == '-') throw std::invalid_argument(key);
            return v;
        } catch (const std::logic_error&) {
            throw config_error("line " + std::to_string(e.line) + ", column " + std::to_string(e.column) +
                                   ": bad unsigned integer for " + key,
                               e.line, e.column);
        }
    }

    void set(const std::string& key, const std::string& value) { entries_[key] = {value, 0, 0}; }

    std::string serialize() const {
        std::string out;
        for (const auto& [k, e] : entries_) out += k + "=" + e.value + "\n";
        return out;
    }

private:
    std::map<std::string, Entry> entries_;

    const Entry& entry(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) throw config_error("missing key " + key);
        return it->second;
    }

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }
};

enum ExitCode : int { exit_pass = 0, exit_failure = 1, exit_usage = 2, exit_numerical = 3 };

inline std::vector<std::complex<double>> parse_coefficients(const std::string& text) {
    std::vector<std::complex<double>> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ';')) {
        const auto comma = item.find(',');
        try {
            if (comma == std::string::npos) out.emplace_back(std::stod(item), 0.0);
            else out.emplace_back(std::stod(item.substr(0, comma)), std::stod(item.substr(comma + 1)));
        } catch (const std::logic_error&) {
            throw config_error("bad coefficient list: " + text);
        }
    }
    if (out.empty()) throw config_error("empty coefficient list");
    return out;
}

struct FieldSpec {
    BaseGrid<double> grid;
    std::vector<double> custom_u;
};

inline FieldSpec build_field(const Config& cfg) {
    const std::string kind = cfg.get("field.kind");
    FieldSpec fs;
    if (kind == "custom") {
        std::ifstream in(cfg.get("field.file"));
        if (!in) throw config_error("cannot read field.file " + cfg.get("field.file"));
        auto f = read_grid<double>(in);
        fs.grid = std::move(f.grid);
        fs.custom_u = std::move(f.u);
        return fs;
    }
    const int nx = cfg.integer("grid.nx"), ny = cfg.integer("grid.ny");
    const double lx = cfg.number_or("grid.lx", 2 * std::numbers::pi);
    const double ly = cfg.number_or("grid.ly", 2 * std::numbers::pi);
    if (kind == "constant") {
        fs.grid = make_constant_field(cfg.number_or("field.a", 0.0), cfg.number_or("field.b", 0.0), nx, ny, lx, ly);
    } else if (kind == "holomorphic") {
        // periodic sampling of a polynomial: Codazzi holds inside, not across the wrap
        const auto coeffs = parse_coefficients(cfg.get("field.coeffs"));
        const auto dc = derive_poly(coeffs);
        fs.grid = make_constant_field(0.0, 0.0, nx, ny, lx, ly);
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                fs.grid.at(i, j) = holomorphic_sample(coeffs, dc, std::complex<double>(fs.grid.x(i), fs.grid.y(j)));
                require_almost_fuchsian(fs.grid.at(i, j));
            }
        fs.grid.approximate_codazzi = codazzi_residual(fs.grid) > 1e-10;
    } else {
        throw config_error("field.kind must be constant, holomorphic or custom");
    }
    return fs;
}

struct InitialHeight {
    std::vector<double> u;
    bool equidistant = false;
    double slice = 0;
};

inline InitialHeight build_initial_height(const Config& cfg, const FieldSpec& fs, double c) {
    const auto& g = fs.grid;
    const std::string kind = cfg.get("flow.u0");
    InitialHeight h;
    if (kind == "custom") {
        if (cfg.has("flow.u0_file")) {
            std::ifstream in(cfg.get("flow.u0_file"));
            if (!in) throw config_error("cannot read flow.u0_file");
            auto f = read_grid<double>(in);
            if (f.u.size() != g.size()) throw config_error("flow.u0_file does not match the grid");
            h.u = std::move(f.u);
        } else if (!fs.custom_u.empty()) {
            h.u = fs.custom_u;
        } else {
            throw config_error("flow.u0=custom needs flow.u0_file or heights in field.file");
        }
        return h;
    }
    if (kind.rfind("slice:", 0) != 0) throw config_error("flow.u0 must be slice:R or custom");
    const std::string r = kind.substr(6);
    const double lmax = g.lambda_max();
    if (r == "rc" || r == "rhat" || r == "rtilde") {
        const auto R = critical_radii(c, lmax, std::atanh(c / 2));
        h.slice = r == "rc" ? R.r_c : r == "rhat" ? R.r_hat : R.r_tilde;
    } else if (r == "window") {
        h.slice = initial_radius_left(c, lmax);
    } else {
        try {
            h.slice = std::stod(r);
        } catch (const std::logic_error&) {
            throw config_error("bad slice radius in flow.u0: " + r);
        }
    }
    h.slice += cfg.number_or("flow.u0_shift", 0.0);
    const double amp = cfg.number_or("flow.u0_amp", 0.0);
    const double kx = cfg.number_or("flow.u0_kx", 1.0), ky = cfg.number_or("flow.u0_ky", 0.0);
    h.u.resize(g.size());
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            h.u[g.index(i, j)] =
                h.slice + amp * std::sin(2 * std::numbers::pi * (kx * g.x(i) / g.lx + ky * g.y(j) / g.ly));
    h.equidistant = amp == 0.0;
    return h;
}

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw config_error("cannot create output directory " + dir);
}

struct SimulateOutcome {
    int exit_code = exit_pass;
    std::vector<std::string> failures;
    RunResult<double> run;
    double slack = 0;
    std::vector<MonitorReport<double>> monitors;
    HeightEnvelope<double> envelope;
    bool approximate_codazzi = false;
};

inline std::string fmt_num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline SimulateOutcome run_simulate(const Config& cfg, const std::string& out_dir, int threads = 1) {
    const double c = cfg.number("flow.c");
    require_target(c);
    FieldSpec fs = build_field(cfg);
    const auto& g = fs.grid;
    const InitialHeight init = build_initial_height(cfg, fs, c);
    const double eps1 = cfg.number_or("flow.eps1", 0.1);
    const double lmax = g.lambda_max();

    RunPolicy<double> p;
    p.kappa = cfg.number_or("flow.kappa", default_kappa);
    const std::string dts = cfg.get("flow.dt");
    p.dt = dts == "auto" ? 0.5 * stability_cap(g, init.u, p.kappa) : cfg.number("flow.dt");
    p.t_max = cfg.number_or("flow.t_max", 10.0);
    p.tol = cfg.number_or("flow.tol", 1e-8);
    p.record_every = cfg.number_or("flow.record_every", 0.05);
    p.threads = threads;
    const std::string mon = cfg.get_or("monitors", "on");
    if (mon != "on" && mon != "off") throw config_error("monitors must be on or off");

    SimulateOutcome out;
    out.approximate_codazzi = g.approximate_codazzi;
    out.run = run_to_convergence(make_graph_state(g, init.u, c, threads), p);
    const auto& hist = out.run.history;
    const double h = std::min(g.hx(), g.hy());
    out.slack = 10 * (h * h + p.dt);

    out.envelope = height_envelope_monitor(hist, c, lmax, out.slack);
    if (mon == "on") {
        out.monitors.push_back(out.envelope.report);
        out.monitors.push_back(mean_convex_monitor(hist, out.slack));
        const double eps = cfg.number_or("flow.eps", lmax);
        bool angle_pre = init.equidistant && eps <= epsilon_gate(eps1).eps_max && lmax <= eps && !g.approximate_codazzi;
        if (angle_pre) {
            try {
                const auto w = initial_radius(c, lmax, std::max(eps, 1e-300), eps1);
                angle_pre = init.slice >= w.lo - 1e-12 && init.slice <= w.hi + 1e-12;
            } catch (const std::domain_error&) {
                angle_pre = false;
            }
        }
        out.monitors.push_back(angle_monitor(hist, eps1, angle_pre));
    }

    std::map<std::size_t, std::string> flags;
    for (const auto& m : out.monitors)
        for (const auto& v : m.violations) {
            auto& f = flags[v.step];
            const std::string tag = m.precondition ? m.name : m.name + "(info)";
            if (f.find(tag) == std::string::npos) f += (f.empty() ? "" : "|") + tag;
        }

    ensure_dir(out_dir);
    {
        std::ofstream csv(out_dir + "/series.csv");
        csv << "t,w,v,min_theta,max_H_minus_c,lower_env,upper_env,monitor_flags\n";
        for (std::size_t k = 0; k < hist.size(); ++k) {
            const auto& r = hist[k];
            csv << fmt_num(r.t) << ',' << fmt_num(r.w) << ',' << fmt_num(r.v) << ',' << fmt_num(r.min_theta) << ','
                << fmt_num(r.max_abs_H_minus_c) << ',' << fmt_num(out.envelope.lower[k]) << ','
                << fmt_num(out.envelope.upper[k]) << ',' << (flags.count(k) ? flags[k] : "ok") << '\n';
        }
    }
    {
        std::ofstream fu(out_dir + "/final_u.txt");
        write_grid(fu, g, &out.run.state.u);
    }

    for (const auto& m : out.monitors)
        if (m.failed()) out.failures.push_back(m.name + ": " + std::to_string(m.violations.size()) + " violations");
    if (cfg.has("expect.converged")) {
        const bool want = cfg.get("expect.converged") == "true";
        if (want != out.run.converged) out.failures.push_back("expect.converged");
    }
    double u_err = 0;
    if (cfg.has("expect.u_final")) {
        const std::string target = cfg.get("expect.u_final");
        double val;
        if (target == "rc") val = std::atanh(c / 2);
        else if (target == "rhat") val = critical_radii(c, lmax, std::atanh(c / 2)).r_hat;
        else val = cfg.number("expect.u_final");
        for (double u : out.run.state.u) u_err = std::max(u_err, std::abs(u - val));
        if (!(u_err < cfg.number_or("expect.u_tol", 1e-6))) out.failures.push_back("expect.u_final");
    }
    {
        std::ofstream rep(out_dir + "/report.txt");
        rep << "scenario: " << cfg.get_or("scenario.name", "unnamed") << '\n';
        rep << "converged: " << (out.run.converged ? "true" : "false") << '\n';
        rep << "reason: " << out.run.reason << '\n';
        rep << "t_final: " << fmt_num(out.run.state.t) << '\n';
        rep << "steps: " << out.run.steps << '\n';
        rep << "dt: " << fmt_num(p.dt) << '\n';
        rep << "max_H_minus_c: " << fmt_num(max_abs_H_minus_c(out.run.state)) << '\n';
        rep << "lambda_max: " << fmt_num(lmax) << '\n';
        rep << "approximate_codazzi: " << (g.approximate_codazzi ? "true" : "false") << '\n';
        rep << "monitor_slack: " << fmt_num(out.slack) << '\n';
        for (const auto& m : out.monitors)
            rep << "monitor." << m.name << ": "
                << (!m.precondition ? "informational" : m.violations.empty() ? "pass" : "fail") << " worst_margin="
                << fmt_num(m.worst_margin) << " violations=" << m.violations.size() << '\n';
        if (cfg.has("expect.u_final")) rep << "u_final_error: " << fmt_num(u_err) << '\n';
        rep << "failures: " << out.failures.size() << '\n';
        for (const auto& f : out.failures) rep << "failure: " << f << '\n';
    }
    out.exit_code = out.failures.empty() ? exit_pass : exit_failure;
    return out;
}

struct VerifyOutcome {
    int exit_code = exit_pass;
    double max_error = 0;
    std::size_t failures = 0;
    std::string summary;
};

inline ShapeSample<double> random_sample(SplitMix64& rng, double eps) {
    ShapeSample<double> s;
    do {
        s = {rng.uniform(-eps, eps), rng.uniform(-eps, eps), rng.uniform(-eps, eps), rng.uniform(-eps, eps)};
    } while (!(s.lambda() <= eps) || !(s.lambda2() < 1));
    return s;
}

// coordinate Christoffels of g(x, r) built from the linear holomorphic field through s
inline std::array<Mat2<double>, 2> christoffels_fd(const ShapeSample<double>& s, double r, double h = 1e-4) {
    auto metric = [&](double x1, double x2) {
        const ShapeSample<double> f{s.a + s.m * x1 + s.n * x2, s.b + s.n * x1 - s.m * x2, s.m, s.n};
        return build_metric_data(f, r).g;
    };
    const std::array<Mat2<double>, 2> dg = {(metric(h, 0) - metric(-h, 0)) / (2 * h),
                                            (metric(0, h) - metric(0, -h)) / (2 * h)};
    const Mat2<double> gi = metric(0, 0).inverse();
    std::array<Mat2<double>, 2> G;
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double v = 0;
                for (int l = 0; l < 2; ++l) v += 0.5 * gi(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
                G[k](i, j) = v;
            }
    return G;
}

inline VerifyOutcome run_verify(const std::string& suite, int samples, std::uint64_t seed, double eps,
                                const std::string& out_dir) {
    if (samples <= 0) throw config_error("--samples must be positive");
    if (!(eps > 0) || !(eps < 1)) throw config_error("--eps must lie in (0, 1)");
    SplitMix64 rng(seed);
    VerifyOutcome out;
    ensure_dir(out_dir);
    std::ofstream csv(out_dir + "/verify_" + suite + ".csv");
    if (suite == "gamma") {
        csv << "sample_id,r0,c,theta,H,closed,assembled,rel_err\n";
        for (int k = 0; k < samples; ++k) {
            const auto s = random_sample(rng, eps);
            const double r0 = rng.uniform(-2, 2), c = rng.uniform(0, 1.9);
            const double th = rng.uniform(0.2, 0.999), H = rng.uniform(-3, 3);
            const double cl = theta_rhs_closed_form(s, r0, c, th, H);
            const double as = theta_rhs_assembled(s, r0, c, th, H);
            const double diff = std::abs(cl - as);
            const double rel = diff / std::max(std::abs(cl), std::numeric_limits<double>::min());
            if (!(diff <= 1e-12 || rel <= 1e-9)) ++out.failures;
            out.max_error = std::max(out.max_error, std::min(rel, diff / 1e-12 * 1e-9));
            csv << k << ',' << fmt_num(r0) << ',' << fmt_num(c) << ',' << fmt_num(th) << ',' << fmt_num(H) << ','
                << fmt_num(cl) << ',' << fmt_num(as) << ',' << fmt_num(rel) << '\n';
        }
    } else if (suite == "geometry") {
        csv << "sample_id,a,b,r,inverse_err,radial_residual_rel,H_err,alpha_minus_eta_err\n";
        for (int k = 0; k < samples; ++k) {
            const auto s = random_sample(rng, eps);
            const double r = rng.uniform(-3, 3);
            const auto md = build_metric_data(s, r);
            const auto ec = equidistant_curvatures(s, r);
            const double inv = (md.E * md.Einv - Mat2<double>::Identity()).cwiseAbs().maxCoeff();
            const double res = radial_ode_residual(s, r).cwiseAbs().maxCoeff() / std::max(1.0, md.g.cwiseAbs().maxCoeff());
            const double herr = std::abs(md.alpha + md.eta - ec.H);
            const double amn = std::abs(md.alpha - md.eta - 2 * s.a / md.detE);
            const double worst = std::max({inv, res, herr, amn});
            if (!(worst <= 1e-12)) ++out.failures;
            out.max_error = std::max(out.max_error, worst);
            csv << k << ',' << fmt_num(s.a) << ',' << fmt_num(s.b) << ',' << fmt_num(r) << ',' << fmt_num(inv) << ','
                << fmt_num(res) << ',' << fmt_num(herr) << ',' << fmt_num(amn) << '\n';
        }
    } else if (suite == "christoffel") {
        csv << "sample_id,a,b,m,n,r,max_abs_err\n";
        for (int k = 0; k < samples; ++k) {
            const auto s = random_sample(rng, eps);
            const double r = rng.uniform(-2, 2);
            const auto cs = christoffels(s, r);
            const auto fd = christoffels_fd(s, r);
            const double err = std::max((cs.B - fd[0]).cwiseAbs().maxCoeff(), (cs.C - fd[1]).cwiseAbs().maxCoeff());
            if (!(err <= 1e-7)) ++out.failures;
            out.max_error = std::max(out.max_error, err);
            csv << k << ',' << fmt_num(s.a) << ',' << fmt_num(s.b) << ',' << fmt_num(s.m) << ',' << fmt_num(s.n) << ','
                << fmt_num(r) << ',' << fmt_num(err) << '\n';
        }
    } else if (suite == "codazzi") {
        csv << "sample_id,residual_h,residual_h2,order\n";
        const double scale = std::min(eps, 0.15);
        for (int k = 0; k < samples; ++k) {
            std::vector<std::complex<double>> coeffs;
            for (int d = 0; d <= 3; ++d) coeffs.emplace_back(rng.uniform(-scale, scale), rng.uniform(-scale, scale));
            const auto g1 = make_holomorphic_patch(coeffs, 21, 21, -1.0, -1.0, 2.0, 2.0);
            const auto g2 = make_holomorphic_patch(coeffs, 41, 41, -1.0, -1.0, 2.0, 2.0);
            const double r1 = codazzi_residual(g1), r2 = codazzi_residual(g2);
            const double order = std::log2(r1 / r2);
            if (!(order >= 1.8 && order <= 2.2)) ++out.failures;
            out.max_error = std::max(out.max_error, std::abs(order - 2));
            csv << k << ',' << fmt_num(r1) << ',' << fmt_num(r2) << ',' << fmt_num(order) << '\n';
        }
    } else {
        throw config_error("unknown verify suite " + suite);
    }
    std::ostringstream sm;
    sm << "suite=" << suite << " samples=" << samples << " seed=" << seed << " eps=" << eps
       << " failures=" << out.failures << " max_error=" << std::setprecision(6) << out.max_error;
    out.summary = sm.str();
    out.exit_code = out.failures == 0 ? exit_pass : exit_failure;
    return out;
}

// verify.suite selects a verification run, anything else is a flow scenario
inline int run_scenario(const Config& cfg, const std::string& out_dir, int threads = 1, std::string* summary = nullptr) {
    if (cfg.has("verify.suite")) {
        const auto seed = cfg.seed_or("seed", 1);
        const auto res = run_verify(cfg.get("verify.suite"), cfg.integer("verify.samples"), seed,
                                    cfg.number("verify.eps"), out_dir);
        if (summary) *summary = res.summary;
        return res.exit_code;
    }
    const auto res = run_simulate(cfg, out_dir, threads);
    if (summary) {
        std::ostringstream os;
        os << "converged=" << (res.run.converged ? "true" : "false") << " steps=" << res.run.steps
           << " t=" << res.run.state.t << " max|H-c|=" << max_abs_H_minus_c(res.run.state);
        for (const auto& f : res.failures) os << "\nfailure: " << f;
        *summary = os.str();
    }
    return res.exit_code;
}

struct OracleOutcome {
    int exit_code = exit_pass;
    double gap = 0;
    double gap_half_dt = 0;
    double order_dt = 0;
    bool bracket_ok = true;
    std::string summary;
};

// sup-norm gap between the PDE started from a constant slice and the scalar ODE
inline double oracle_gap(double c, double lambda, double w0, double t_end, double dt, int n,
                         std::vector<std::array<double, 4>>* rows = nullptr) {
    const auto g = make_constant_field(lambda, 0.0, n, n, 2 * std::numbers::pi, 2 * std::numbers::pi);
    RunPolicy<double> p;
    p.dt = dt;
    p.t_max = t_end;
    p.tol = -1;
    p.record_every = 0.01;
    const auto run = run_to_convergence(make_graph_state(g, slice_height(g, w0), c), p);
    const auto ode = fuchsian_ode(c, lambda, w0, t_end, std::min(dt, 1e-3));
    double gap = 0;
    for (const auto& r : run.history) {
        const double o = ode.at(r.t);
        gap = std::max({gap, std::abs(r.w - o), std::abs(r.v - o)});
        if (rows) rows->push_back({r.t, o, r.w, r.v});
    }
    return gap;
}

inline OracleOutcome run_oracle(double c, double lambda, double w0, double t_end, double dt, int n,
                                const std::string& out_dir) {
    require_target(c);
    OracleOutcome out;
    std::vector<std::array<double, 4>> rows;
    out.gap = oracle_gap(c, lambda, w0, t_end, dt, n, &rows);
    out.gap_half_dt = oracle_gap(c, lambda, w0, t_end, dt / 2, n);
    out.order_dt = out.gap_half_dt > 0 && out.gap > 0 ? std::log2(out.gap / out.gap_half_dt) : 0;
    // comparison with the Fuchsian ODE from the same start
    const auto ode0 = fuchsian_ode(c, 0.0, w0, t_end, std::min(dt, 1e-3));
    const auto odel = fuchsian_ode(c, lambda, w0, t_end, std::min(dt, 1e-3));
    for (const auto& r : rows) {
        const double a = ode0.at(r[0]), b = odel.at(r[0]);
        out.bracket_ok = out.bracket_ok && r[2] >= std::min(a, b) - 1e-4 && r[3] <= std::max(a, b) + 1e-4;
    }
    ensure_dir(out_dir);
    std::ofstream csv(out_dir + "/oracle.csv");
    csv << "t,ode,pde_min,pde_max,gap\n";
    for (const auto& r : rows)
        csv << fmt_num(r[0]) << ',' << fmt_num(r[1]) << ',' << fmt_num(r[2]) << ',' << fmt_num(r[3]) << ','
            << fmt_num(std::max(std::abs(r[2] - r[1]), std::abs(r[3] - r[1]))) << '\n';
    std::ostringstream sm;
    sm << "gap=" << std::setprecision(6) << out.gap << " gap_half_dt=" << out.gap_half_dt
       << " order_dt=" << out.order_dt << " bracket=" << (out.bracket_ok ? "pass" : "fail");
    out.summary = sm.str();
    out.exit_code = out.gap < 1e-4 && out.bracket_ok ? exit_pass : exit_failure;
    return out;
}

struct FoliateOutcome {
    int exit_code = exit_pass;
    FoliationResult<double> result;
};

inline FoliateOutcome run_foliate(const Config& cfg, double c_min, double c_max, int count, const std::string& out_dir,
                                  int threads = 1) {
    if (count < 2) throw config_error("--count must be at least 2");
    FieldSpec fs = build_field(cfg);
    const auto& g = fs.grid;
    const double eps1 = cfg.number_or("flow.eps1", 0.1);
    SolverConfig<double> sc;
    sc.run.t_max = cfg.number_or("flow.t_max", 60.0);
    sc.run.tol = cfg.number_or("flow.tol", 1e-9);
    sc.run.record_every = cfg.number_or("flow.record_every", 1.0);
    sc.run.kappa = cfg.number_or("flow.kappa", default_kappa);
    sc.run.threads = threads;
    sc.slack = cfg.number_or("foliation.slack", 1e-6);
    const std::string dts = cfg.get_or("flow.dt", "auto");
    sc.run.dt = dts == "auto" ? 0.5 * stability_cap(g, slice_height(g, 0.0), sc.run.kappa) : cfg.number("flow.dt");
    const auto cs = linear_c_grid(c_min, c_max, count);
    FoliateOutcome out;
    out.result = sweep_cmc(g, cs, eps1, sc);
    const auto& R = out.result;
    ensure_dir(out_dir);
    std::ofstream csv(out_dir + "/foliation.csv");
    csv << "c,min_u,max_u,max_H_err,ordered_vs_prev,sep_lo_bound,sep_hi_bound,sep_measured_min,sep_measured_max\n";
    bool ok = R.certificate_ok;
    for (std::size_t k = 0; k < cs.size(); ++k) {
        const auto [mn, mx] = std::minmax_element(R.surfaces[k].begin(), R.surfaces[k].end());
        ok = ok && R.converged[k];
        csv << fmt_num(cs[k]) << ',' << fmt_num(*mn) << ',' << fmt_num(*mx) << ',' << fmt_num(R.max_H_err[k]) << ',';
        if (k == 0) {
            csv << ",,,,\n";
        } else {
            const auto& pc = R.distance_bounds[k - 1];
            csv << (pc.ordered ? "true" : "false") << ',' << fmt_num(pc.lo) << ',' << fmt_num(pc.hi) << ','
                << fmt_num(pc.measured_min) << ',' << fmt_num(pc.measured_max) << '\n';
        }
        std::ofstream fu(out_dir + "/final_u_" + std::to_string(k) + ".txt");
        write_grid(fu, g, &R.surfaces[k]);
    }
    out.exit_code = ok ? exit_pass : exit_failure;
    return out;
}

} // namespace afm
