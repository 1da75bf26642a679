#pragma once

#include <stdexcept>
#include <string>

namespace fdual {

struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Matrix without a complete eigenbasis (or numerically indistinguishable from one).
struct defective_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct pole_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct quadrature_error : std::runtime_error {
    quadrature_error(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_error(achieved) {}
    double achieved_error;
};

// Precondition of a decomposition or check violated beyond tolerance.
struct structure_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace fdual
