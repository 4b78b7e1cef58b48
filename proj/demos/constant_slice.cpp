// flow a wavy graph over a constant field and print the heights against the scalar ODE
#include <cstdio>
#include <numbers>

#include "afm/graph_flow.hpp"

int main() {
    const double L = 2 * std::numbers::pi, c = 1.0, lambda = 0.1;
    const auto g = afm::make_constant_field(lambda, 0.0, 32, 32, L, L);
    std::vector<double> u0(g.size());
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) u0[g.index(i, j)] = 1.0 + 0.1 * std::sin(g.x(i)) * std::cos(g.y(j));

    afm::RunPolicy<double> p;
    p.t_max = 6;
    p.record_every = 0.5;
    const auto run = afm::run_to_convergence(afm::make_graph_state(g, u0, c), p);
    const auto ode = afm::fuchsian_ode(c, lambda, 1.0, p.t_max, 1e-3);

    std::printf("%6s %12s %12s %12s %12s\n", "t", "min u", "max u", "ode(u=1)", "max|H-c|");
    for (const auto& r : run.history)
        std::printf("%6.2f %12.8f %12.8f %12.8f %12.3e\n", r.t, r.w, r.v, ode.at(r.t), r.max_abs_H_minus_c);
    std::printf("fixed point %.12f, %s\n", ode.w_star, run.reason.c_str());
}
