#pragma once
// The full verifier: encoder -> T ERNet layers -> aggregator -> classifier.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gear/aggregator.hpp"
#include "gear/encoder.hpp"
#include "gear/ernet.hpp"

namespace gear {

struct GearConfig {
    EncoderConfig encoder;
    std::size_t hidden_dim = 64;
    std::size_t num_layers = 1;
    AggregatorKind aggregator = AggregatorKind::Attention;
    bool classifier_relu = true;
    // Positive so that ReLU(W o + b) starts in its active region.
    double classifier_bias_init = 3.0;

    ErNetConfig ernet() const {
        return {encoder.feature_dim, hidden_dim, num_layers, kNumLabels};
    }
    void validate() const;
};

struct GearParams {
    EncoderParams encoder; // unused (empty) for precomputed features
    std::vector<ErNetLayerParams> layers;
    AggregatorParams aggregator;

    // Every learnable matrix, in a fixed order.
    std::vector<Parameter*> all();
    std::vector<const Parameter*> all() const;
    void zero_grad();
};

GearParams init_gear_params(const GearConfig& cfg, std::uint64_t seed);

struct VerifierInput {
    std::string id;
    std::string claim;
    std::vector<std::string> evidence;
};

struct BoundGear {
    std::optional<BoundEncoder> encoder;
    std::vector<BoundErNetLayer> layers;
    BoundAggregator aggregator;
};

BoundGear bind(Tape& tape, const GearConfig& cfg, GearParams& params);

struct ForwardPass {
    Var probs;
    std::vector<Matrix> layer_attention;
    std::optional<std::vector<double>> aggregator_attention;
};

// Runs from already-encoded vectors (the part downstream of the encoder).
ForwardPass forward_encoded(const GearConfig& cfg, const BoundGear& bound, const EncodedVars& enc);

// precomputed must be non-null when cfg.encoder.kind is Precomputed.
ForwardPass forward(Tape& tape, const GearConfig& cfg, const BoundGear& bound,
                    const VerifierInput& input, const PrecomputedFeatures* precomputed = nullptr);

VerifierOutput predict(const GearConfig& cfg, GearParams& params, const VerifierInput& input,
                       const PrecomputedFeatures* precomputed = nullptr);

} // namespace gear
