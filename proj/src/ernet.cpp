#include "gear/ernet.hpp"

#include <string>

#include "gear/error.hpp"

namespace gear {

void ErNetConfig::validate() const {
    if (feature_dim < 1 || hidden_dim < 1) throw ConfigError("ERNet needs F >= 1 and H >= 1");
    if (num_labels != 3) throw ConfigError("ERNet expects C == 3 labels");
}

std::vector<ErNetLayerParams> init_ernet_params(const ErNetConfig& cfg, Rng& rng) {
    cfg.validate();
    std::vector<ErNetLayerParams> layers;
    layers.reserve(cfg.num_layers);
    for (std::size_t t = 0; t < cfg.num_layers; ++t) {
        const std::string prefix = "ernet." + std::to_string(t);
        ErNetLayerParams l;
        l.w0 = Parameter(prefix + ".w0", xavier_uniform(cfg.hidden_dim, 2 * cfg.feature_dim, rng));
        l.w1 = Parameter(prefix + ".w1", xavier_uniform(1, cfg.hidden_dim, rng));
        layers.push_back(std::move(l));
    }
    return layers;
}

BoundErNetLayer bind(Tape& tape, ErNetLayerParams& layer) {
    return {tape.param(layer.w0), tape.param(layer.w1)};
}

Var attention_logit(const BoundErNetLayer& layer, Var h_i, Var h_j) {
    if (h_i.rows() != h_j.rows() || h_i.cols() != 1 || h_j.cols() != 1)
        throw DimensionError("attention_logit: states " + h_i.value().shape_string() + " and " +
                             h_j.value().shape_string());
    if (layer.w0.cols() != 2 * h_i.rows())
        throw DimensionError("attention_logit: W0 is " + layer.w0.value().shape_string() +
                             " but [h_i ; h_j] has " + std::to_string(2 * h_i.rows()) + " rows");
    return ad::matmul(layer.w1, ad::relu(ad::matmul(layer.w0, ad::concat_rows(h_i, h_j))));
}

LayerOutput propagate_layer(const BoundErNetLayer& layer, std::span<const Var> states) {
    if (states.empty()) throw EmptyAggregationError("propagate_layer: no evidence nodes");
    const std::size_t n = states.size();
    const Var stacked = ad::stack_columns(states); // F x N
    LayerOutput out;
    out.attention = Matrix(n, n);
    out.states.reserve(n);
    std::vector<Var> logits(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) logits[j] = attention_logit(layer, states[i], states[j]);
        const Var alpha = ad::softmax_vec(ad::concat_rows(logits));
        for (std::size_t j = 0; j < n; ++j) out.attention(i, j) = alpha.value()[j];
        out.states.push_back(ad::matmul(stacked, alpha));
    }
    return out;
}

ErNetOutput run_ernet(const ErNetConfig& cfg, std::span<const BoundErNetLayer> layers,
                      std::span<const Var> initial) {
    if (layers.size() != cfg.num_layers)
        throw ConfigError("run_ernet: " + std::to_string(layers.size()) +
                          " layer parameter sets for T=" + std::to_string(cfg.num_layers));
    if (initial.empty()) throw EmptyAggregationError("run_ernet: no evidence nodes");
    ErNetOutput out;
    out.states.assign(initial.begin(), initial.end());
    for (const BoundErNetLayer& layer : layers) {
        LayerOutput lo = propagate_layer(layer, out.states);
        out.states = std::move(lo.states);
        out.attention.push_back(std::move(lo.attention));
    }
    return out;
}

std::pair<HiddenStates, std::vector<Matrix>> run_ernet(const ErNetConfig& cfg,
                                                       std::vector<ErNetLayerParams>& params,
                                                       const HiddenStates& initial) {
    if (params.size() != cfg.num_layers)
        throw ConfigError("run_ernet: " + std::to_string(params.size()) +
                          " layer parameter sets for T=" + std::to_string(cfg.num_layers));
    Tape tape;
    std::vector<BoundErNetLayer> bound;
    for (ErNetLayerParams& l : params) bound.push_back(bind(tape, l));
    std::vector<Var> states;
    for (const Matrix& h : initial.states) {
        if (h.rows() != cfg.feature_dim || h.cols() != 1)
            throw DimensionError("run_ernet: state is " + h.shape_string() + ", expected " +
                                 std::to_string(cfg.feature_dim) + "x1");
        states.push_back(tape.constant(h));
    }
    ErNetOutput out = run_ernet(cfg, bound, states);
    HiddenStates final_states;
    final_states.layer = initial.layer + cfg.num_layers;
    for (const Var& v : out.states) final_states.states.push_back(v.value());
    return {std::move(final_states), std::move(out.attention)};
}

} // namespace gear
