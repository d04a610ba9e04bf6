#include "slr/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "slr/error.hpp"

namespace slr {

GradCheckReport finite_diff_check(const std::function<double()>& f, std::vector<CheckedParameter> params,
                                  double eps) {
    if (!(eps >= 1e-7 && eps <= 1e-3)) throw ParameterError("finite_diff_check: eps must lie in [1e-7, 1e-3]");

    auto evaluate = [&f] {
        const double v = f();
        if (!std::isfinite(v)) throw EvaluationError("finite_diff_check: objective is not finite");
        return v;
    };

    GradCheckReport report;
    for (CheckedParameter& p : params) {
        if (p.value == nullptr) throw ContractError("finite_diff_check: null parameter " + p.name);
        if (p.analytic.rows() != p.value->rows() || p.analytic.cols() != p.value->cols()) {
            throw DimensionError("finite_diff_check: analytic gradient shape differs for " + p.name);
        }
        GradCheckReport::Entry entry{p.name};
        double* data = p.value->data();
        for (Index i = 0; i < p.value->size(); ++i) {
            const double saved = data[i];
            data[i] = saved + eps;
            const double up = evaluate();
            data[i] = saved - eps;
            const double down = evaluate();
            data[i] = saved;

            const double numeric = (up - down) / (2.0 * eps);
            const double analytic = p.analytic.data()[i];
            const double err = std::abs(analytic - numeric) / std::max(1e-8, std::abs(numeric));
            if (err > entry.max_relative_error || entry.worst_index < 0) {
                entry.max_relative_error = std::max(entry.max_relative_error, err);
                entry.worst_index = i;
                entry.analytic = analytic;
                entry.numeric = numeric;
            }
        }
        report.max_relative_error = std::max(report.max_relative_error, entry.max_relative_error);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

} // namespace slr
