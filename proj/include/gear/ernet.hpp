#pragma once
// Evidence reasoning network: T layers of attention-weighted message passing
// over a fully connected evidence graph with self-loops.
//
//   p_ij   = W1 * ReLU(W0 * [h_i ; h_j])        W0: H x 2F, W1: 1 x H
//   a_ij   = softmax_j(p_ij)                     j ranges over all nodes, i included
//   h_i^t  = sum_j a_ij h_j^{t-1}
//
// Each layer has its own (W0, W1). No bias terms, no feature transform.

#include <span>
#include <vector>

#include "gear/autodiff.hpp"
#include "gear/random.hpp"

namespace gear {

struct ErNetConfig {
    std::size_t feature_dim = 32; // F
    std::size_t hidden_dim = 16;  // H
    std::size_t num_layers = 1;   // T
    std::size_t num_labels = 3;   // C

    void validate() const;
};

struct ErNetLayerParams {
    Parameter w0; // H x 2F
    Parameter w1; // 1 x H
};

struct HiddenStates {
    std::vector<Matrix> states; // each F x 1
    std::size_t layer = 0;
};

struct BoundErNetLayer {
    Var w0;
    Var w1;
};

struct LayerOutput {
    std::vector<Var> states;
    Matrix attention; // N x N, row i = a_i.
};

struct ErNetOutput {
    std::vector<Var> states;
    std::vector<Matrix> attention; // one N x N matrix per layer
};

std::vector<ErNetLayerParams> init_ernet_params(const ErNetConfig& cfg, Rng& rng);

BoundErNetLayer bind(Tape& tape, ErNetLayerParams& layer);

Var attention_logit(const BoundErNetLayer& layer, Var h_i, Var h_j);

LayerOutput propagate_layer(const BoundErNetLayer& layer, std::span<const Var> states);

ErNetOutput run_ernet(const ErNetConfig& cfg, std::span<const BoundErNetLayer> layers,
                      std::span<const Var> initial);

// Value-level entry point over a private tape; returns final states and the
// per-layer attention matrices.
std::pair<HiddenStates, std::vector<Matrix>> run_ernet(const ErNetConfig& cfg,
                                                       std::vector<ErNetLayerParams>& params,
                                                       const HiddenStates& initial);

} // namespace gear
