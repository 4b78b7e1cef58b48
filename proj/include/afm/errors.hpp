#pragma once
#include <stdexcept>
#include <string>

namespace afm {

// numerical faults raised while evolving or evaluating geometry
struct numerical_fault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct singular_metric : numerical_fault {
    using numerical_fault::numerical_fault;
};

struct stability_error : numerical_fault {
    using numerical_fault::numerical_fault;
};

struct empty_window : std::domain_error {
    using std::domain_error::domain_error;
};

struct config_error : std::runtime_error {
    int line = 0;
    int column = 0;
    config_error(const std::string& what, int l = 0, int c = 0)
        : std::runtime_error(what), line(l), column(c) {}
};

} // namespace afm
