#include "gear/model_check.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <string_view>

#include "gear/random.hpp"
#include "gear/train.hpp"

namespace gear {

namespace {

constexpr std::array<std::string_view, 12> kVocab{"kira", "lives", "in", "rome", "paris", "cold",
                                                  "warm", "climate", "city", "has", "a", "oslo"};

std::string random_sentence(Rng& rng) {
    std::string s;
    const std::size_t n = 2 + rng.below(5);
    for (std::size_t i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += kVocab[rng.below(kVocab.size())];
    }
    return s;
}

} // namespace

ModelGradcheckReport run_model_gradcheck(std::size_t trials, std::uint64_t seed, double tol,
                                         double step) {
    ModelGradcheckReport out;
    out.tolerance = tol;
    out.passed = true;
    for (std::size_t i = 0; i < trials; ++i) {
        Rng rng(derive_seed(seed, 0x6c00 + i));
        ModelGradcheckTrial trial;
        GearConfig& cfg = trial.config;
        cfg.num_layers = i % 4;
        cfg.aggregator = static_cast<AggregatorKind>((i / 4) % 3);
        cfg.classifier_relu = (i / 12) % 2 == 0;
        // Keeps the classifier ReLU away from its kink.
        cfg.classifier_bias_init = 1.0;
        cfg.encoder.feature_dim = rng.below(2) ? 8 : 4;
        cfg.encoder.buckets = 8;
        cfg.hidden_dim = 3 + rng.below(2);
        trial.num_evidence = 1 + rng.below(5);
        trial.gold = static_cast<Label>(rng.below(kNumLabels));

        VerifierInput input{"g" + std::to_string(i), random_sentence(rng), {}};
        for (std::size_t k = 0; k < trial.num_evidence; ++k) input.evidence.push_back(random_sentence(rng));

        GearParams params = init_gear_params(cfg, derive_seed(seed, 0x6d00 + i));
        const std::vector<Parameter*> ps = params.all();
        trial.report = check_gradients(
            [&](Tape& tape) {
                const BoundGear bound = bind(tape, cfg, params);
                return nll_loss(forward(tape, cfg, bound, input).probs, trial.gold);
            },
            ps, step, tol);
        out.max_rel_error = std::max(out.max_rel_error, trial.report.max_rel_error);
        out.passed = out.passed && trial.report.passed;
        out.trials.push_back(std::move(trial));
    }
    return out;
}

} // namespace gear
