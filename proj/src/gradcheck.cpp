#include "gear/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "gear/error.hpp"

namespace gear {

double gradient_relative_error(double analytic, double numeric, double floor) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

GradCheckReport check_gradients(const LossBuilder& build, std::span<Parameter* const> params,
                                double step, double tol) {
    if (!(step > 0.0)) throw ContractError("check_gradients: step must be positive");
    for (Parameter* p : params) p->grad = Matrix::zeros_like(p->value);
    {
        Tape tape;
        tape.backward(build(tape));
    }
    auto eval = [&] {
        Tape tape;
        return build(tape).scalar();
    };
    GradCheckReport report;
    report.tolerance = tol;
    for (Parameter* p : params) {
        ParamGradError pe{p->name, 0.0};
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double orig = p->value[i];
            p->value[i] = orig + step;
            const double up = eval();
            p->value[i] = orig - step;
            const double down = eval();
            p->value[i] = orig;
            const double numeric = (up - down) / (2.0 * step);
            pe.max_rel_error =
                std::max(pe.max_rel_error, gradient_relative_error(p->grad[i], numeric));
        }
        report.max_rel_error = std::max(report.max_rel_error, pe.max_rel_error);
        report.per_param.push_back(std::move(pe));
    }
    report.passed = report.max_rel_error <= tol;
    return report;
}

} // namespace gear
