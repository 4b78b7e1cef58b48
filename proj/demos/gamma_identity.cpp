// evaluate the two forms of the angle-function evolution at a few points
#include <cstdio>

#include "afm/theta_engine.hpp"

int main() {
    const afm::ShapeSample<double> s{0.004, -0.003, 0.002, 0.001};
    std::printf("%6s %6s %8s %20s %20s\n", "r0", "theta", "H", "closed", "assembled");
    for (double r0 : {-1.0, 0.0, 0.8})
        for (double th : {0.3, 0.9})
            for (double H : {-1.0, 1.5}) {
                const double a = afm::theta_rhs_closed_form(s, r0, 1.0, th, H);
                const double b = afm::theta_rhs_assembled(s, r0, 1.0, th, H);
                std::printf("%6.2f %6.2f %8.2f %20.14f %20.14f\n", r0, th, H, a, b);
            }
    const auto G = afm::gamma_coefficients(s, 0.5, 1.0).as_array();
    const auto B = afm::gamma_bounds(0.5);
    for (int i = 0; i < 5; ++i) std::printf("Gamma%d = %+.6e  bound %.3e\n", i + 1, G[i], B[i]);
}
