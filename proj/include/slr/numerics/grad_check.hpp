#pragma once

#include <functional>
#include <string>
#include <vector>

#include "slr/numerics/tensor.hpp"

namespace slr {

/// A parameter tensor perturbed in place by the checker, with its analytic gradient.
struct CheckedParameter {
    std::string name;
    Matrix* value = nullptr;
    Matrix analytic;
};

struct GradCheckReport {
    struct Entry {
        std::string name;
        double max_relative_error = 0.0;
        Index worst_index = -1;
        double analytic = 0.0;
        double numeric = 0.0;
    };
    std::vector<Entry> entries;
    double max_relative_error = 0.0;
};

/// Central differences (f(x+eps) - f(x-eps)) / (2 eps) over every coordinate of
/// every parameter; error per coordinate is |analytic - numeric| / max(1e-8, |numeric|).
/// Parameters are restored bit-exactly afterwards.
GradCheckReport finite_diff_check(const std::function<double()>& f, std::vector<CheckedParameter> params,
                                  double eps = 1e-5);

} // namespace slr
