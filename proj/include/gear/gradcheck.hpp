#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gear/autodiff.hpp"

namespace gear {

struct ParamGradError {
    std::string name;
    double max_rel_error = 0.0;
};

struct GradCheckReport {
    std::vector<ParamGradError> per_param;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

// Builds a scalar loss on a fresh tape, binding parameters with tape.param().
using LossBuilder = std::function<Var(Tape&)>;

// Relative error used by check_gradients: |a - n| / max(|a|, |n|, floor).
// The floor keeps entries whose true gradient is ~0 from dividing noise by noise.
double gradient_relative_error(double analytic, double numeric, double floor = 1e-4);

// Compares backward() against central differences for every entry of every
// parameter. Parameter values are restored before returning; their grads are
// left holding the analytic gradient.
GradCheckReport check_gradients(const LossBuilder& build, std::span<Parameter* const> params,
                                double step, double tol);

} // namespace gear
