#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "afm/scenario.hpp"

namespace {

struct Globals {
    std::string out = "afm_out";
    std::uint64_t seed = 1;
    int threads = 1;
    bool quiet = false;
};

int report_exception() {
    try {
        throw;
    } catch (const afm::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return afm::exit_usage;
    } catch (const afm::numerical_fault& e) {
        std::cerr << "numerical fault: " << e.what() << '\n';
        return afm::exit_numerical;
    } catch (const std::overflow_error& e) {
        std::cerr << "numerical fault: " << e.what() << '\n';
        return afm::exit_numerical;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return afm::exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return afm::exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "numerical fault: " << e.what() << '\n';
        return afm::exit_numerical;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"almost-Fuchsian mean curvature flow toolkit"};
    app.require_subcommand(1);
    Globals gl;
    app.add_option("--out", gl.out, "output directory");
    app.add_option("--seed", gl.seed, "random seed");
    app.add_option("--threads", gl.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", gl.quiet, "suppress summaries");

    std::string sim_cfg;
    auto* sim = app.add_subcommand("simulate", "run the flow for one scenario");
    sim->add_option("config,--config", sim_cfg, "scenario file")->required();

    std::string suite = "gamma";
    int samples = 1000;
    double eps = 0.1;
    auto* ver = app.add_subcommand("verify", "randomised identity checks");
    ver->add_option("--suite", suite, "geometry, gamma, christoffel or codazzi");
    ver->add_option("--samples", samples, "sample count");
    ver->add_option("--eps", eps, "bound on |a|, |b|, |m|, |n|");

    std::string fol_cfg;
    double c_min = 0.1, c_max = 1.5;
    int count = 8;
    auto* fol = app.add_subcommand("foliate", "sweep CMC surfaces over a list of c");
    fol->add_option("config,--config", fol_cfg, "field file")->required();
    fol->add_option("--c-min", c_min);
    fol->add_option("--c-max", c_max);
    fol->add_option("--count", count);

    double oc = 1.0, olambda = 0.0, ow0 = 0.0, ot = 2.0, odt = 1e-3;
    int on = 16;
    auto* orc = app.add_subcommand("oracle", "compare the PDE on a constant field with the scalar ODE");
    orc->add_option("--c", oc);
    orc->add_option("--lambda", olambda);
    orc->add_option("--w0", ow0);
    orc->add_option("--t-end", ot);
    orc->add_option("--dt", odt);
    orc->add_option("--n", on);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : afm::exit_usage;
    }

    try {
        if (*sim) {
            auto cfg = afm::Config::load(sim_cfg);
            int threads = gl.threads;
            if (cfg.has("flow.threads") && app.count("--threads") == 0) threads = cfg.integer("flow.threads");
            std::string summary;
            const int code = afm::run_scenario(cfg, gl.out, threads, &summary);
            if (!gl.quiet) std::cout << summary << '\n';
            return code;
        }
        if (*ver) {
            const auto res = afm::run_verify(suite, samples, gl.seed, eps, gl.out);
            if (!gl.quiet) std::cout << res.summary << '\n';
            return res.exit_code;
        }
        if (*fol) {
            auto cfg = afm::Config::load(fol_cfg);
            const auto res = afm::run_foliate(cfg, c_min, c_max, count, gl.out, gl.threads);
            if (!gl.quiet)
                std::cout << "surfaces=" << res.result.surfaces.size()
                          << " certificate=" << (res.result.certificate_ok ? "pass" : "fail") << '\n';
            return res.exit_code;
        }
        const auto res = afm::run_oracle(oc, olambda, ow0, ot, odt, on, gl.out);
        if (!gl.quiet) std::cout << res.summary << '\n';
        return res.exit_code;
    } catch (...) {
        return report_exception();
    }
}
