#pragma once
// Finite-difference checks of the whole verifier over a spread of small
// randomized configurations.

#include <cstdint>
#include <vector>

#include "gear/gradcheck.hpp"
#include "gear/label.hpp"
#include "gear/model.hpp"

namespace gear {

struct ModelGradcheckTrial {
    GearConfig config;
    std::size_t num_evidence = 0;
    Label gold = Label::Supported;
    GradCheckReport report;
};

struct ModelGradcheckReport {
    std::vector<ModelGradcheckTrial> trials;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

inline constexpr double kGradcheckStep = 1e-5;
inline constexpr double kGradcheckTolerance = 1e-4;

// Trial i cycles T through 0..3 and the aggregator through attention, max,
// mean, so 12 consecutive trials cover every combination. Evidence counts,
// dims, texts and the gold label are drawn from the seed.
ModelGradcheckReport run_model_gradcheck(std::size_t trials, std::uint64_t seed,
                                         double tol = kGradcheckTolerance,
                                         double step = kGradcheckStep);

} // namespace gear
