#include "gear/model.hpp"

#include <string>

#include "gear/error.hpp"

namespace gear {

void GearConfig::validate() const {
    encoder.validate();
    ernet().validate();
    if (num_layers > 3) throw ConfigError("num_layers must be in 0..3");
}

std::vector<Parameter*> GearParams::all() {
    std::vector<Parameter*> out;
    if (encoder.pair_proj.value.size() > 0) {
        out.push_back(&encoder.pair_proj);
        out.push_back(&encoder.claim_proj);
    }
    for (ErNetLayerParams& l : layers) {
        out.push_back(&l.w0);
        out.push_back(&l.w1);
    }
    if (aggregator.kind == AggregatorKind::Attention) {
        out.push_back(&aggregator.att_w0);
        out.push_back(&aggregator.att_w1);
    }
    out.push_back(&aggregator.classifier_w);
    out.push_back(&aggregator.classifier_b);
    return out;
}

std::vector<const Parameter*> GearParams::all() const {
    std::vector<const Parameter*> out;
    for (Parameter* p : const_cast<GearParams*>(this)->all()) out.push_back(p);
    return out;
}

void GearParams::zero_grad() {
    for (Parameter* p : all()) p->zero_grad();
}

GearParams init_gear_params(const GearConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    // Separate streams so changing T does not reshuffle the other weights.
    GearParams p;
    if (cfg.encoder.kind == EncoderKind::HashedBow) {
        Rng rng(derive_seed(seed, 1));
        p.encoder = init_encoder_params(cfg.encoder, rng);
    }
    Rng ernet_rng(derive_seed(seed, 2));
    p.layers = init_ernet_params(cfg.ernet(), ernet_rng);
    Rng agg_rng(derive_seed(seed, 3));
    p.aggregator = init_aggregator_params(cfg.aggregator, cfg.encoder.feature_dim, cfg.hidden_dim,
                                          cfg.classifier_bias_init, agg_rng);
    return p;
}

BoundGear bind(Tape& tape, const GearConfig& cfg, GearParams& params) {
    if (params.layers.size() != cfg.num_layers)
        throw ConfigError("parameters hold " + std::to_string(params.layers.size()) +
                          " ERNet layers, config says T=" + std::to_string(cfg.num_layers));
    if (params.aggregator.kind != cfg.aggregator)
        throw ConfigError("parameters are for the '" +
                          std::string(aggregator_name(params.aggregator.kind)) +
                          "' aggregator, config says '" +
                          std::string(aggregator_name(cfg.aggregator)) + "'");
    BoundGear b{std::nullopt, {}, bind(tape, params.aggregator)};
    if (cfg.encoder.kind == EncoderKind::HashedBow) b.encoder = bind(tape, params.encoder);
    for (ErNetLayerParams& l : params.layers) b.layers.push_back(bind(tape, l));
    return b;
}

ForwardPass forward_encoded(const GearConfig& cfg, const BoundGear& bound, const EncodedVars& enc) {
    ErNetOutput er = run_ernet(cfg.ernet(), bound.layers, enc.evidence);
    AggregateResult agg = aggregate(bound.aggregator, enc.claim, er.states);
    return {classify(bound.aggregator, agg.o, cfg.classifier_relu), std::move(er.attention),
            std::move(agg.attention)};
}

ForwardPass forward(Tape& tape, const GearConfig& cfg, const BoundGear& bound,
                    const VerifierInput& input, const PrecomputedFeatures* precomputed) {
    if (cfg.encoder.kind == EncoderKind::Precomputed) {
        if (precomputed == nullptr) throw ConfigError("precomputed encoder without a feature file");
        const SentenceEncoding& s = precomputed->encode(input.id);
        EncodedVars enc;
        enc.claim = tape.constant(s.claim);
        for (const Matrix& e : s.evidence) enc.evidence.push_back(tape.constant(e));
        if (enc.evidence.empty())
            throw EmptyAggregationError("no evidence vectors for '" + input.id + "'");
        return forward_encoded(cfg, bound, enc);
    }
    return forward_encoded(cfg, bound, encode(cfg.encoder, *bound.encoder, input.claim, input.evidence));
}

VerifierOutput predict(const GearConfig& cfg, GearParams& params, const VerifierInput& input,
                       const PrecomputedFeatures* precomputed) {
    Tape tape;
    const BoundGear bound = bind(tape, cfg, params);
    ForwardPass fp = forward(tape, cfg, bound, input, precomputed);
    VerifierOutput out;
    out.probs = fp.probs.value();
    out.predicted = argmax_label(out.probs);
    out.aggregator_attention = std::move(fp.aggregator_attention);
    out.layer_attention = std::move(fp.layer_attention);
    return out;
}

} // namespace gear
