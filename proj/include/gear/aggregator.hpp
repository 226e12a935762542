#pragma once
// Evidence aggregation and the label classifier.
//
//   attention: p_j = W1' ReLU(W0' [c ; h_j]),  a = softmax(p),  o = sum_k a_k h_k
//   max:       o = elementwise max of h_1..h_N
//   mean:      o = elementwise mean of h_1..h_N
//   classify:  l = softmax(ReLU(W o + b))
//
// The ReLU inside the classifier softmax follows the printed model and can be
// switched off with classifier_relu for comparison runs. With it on, every
// logit is >= 0, so a class whose pre-activation stays negative for all
// inputs receives no gradient.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gear/autodiff.hpp"
#include "gear/label.hpp"
#include "gear/random.hpp"

namespace gear {

enum class AggregatorKind { Attention, Max, Mean };

std::string_view aggregator_name(AggregatorKind k);
AggregatorKind parse_aggregator(std::string_view s);

struct AggregatorParams {
    AggregatorKind kind = AggregatorKind::Attention;
    Parameter att_w0;       // H x 2F, attention kind only
    Parameter att_w1;       // 1 x H, attention kind only
    Parameter classifier_w; // C x F
    Parameter classifier_b; // C x 1
};

struct VerifierOutput {
    Matrix probs; // C x 1
    Label predicted = Label::Supported;
    std::optional<std::vector<double>> aggregator_attention;
    std::vector<Matrix> layer_attention;
};

struct BoundAggregator {
    AggregatorKind kind;
    Var att_w0;
    Var att_w1;
    Var classifier_w;
    Var classifier_b;
};

struct AggregateResult {
    Var o;
    std::optional<std::vector<double>> attention;
};

AggregatorParams init_aggregator_params(AggregatorKind kind, std::size_t feature_dim,
                                        std::size_t hidden_dim, double classifier_bias_init,
                                        Rng& rng);

BoundAggregator bind(Tape& tape, AggregatorParams& p);

AggregateResult aggregate(const BoundAggregator& agg, Var claim_vec, std::span<const Var> states);

// Returns the C x 1 probability node.
Var classify(const BoundAggregator& agg, Var o, bool classifier_relu = true);

// argmax with ties broken by label order SUPPORTED < REFUTED < NEI.
Label argmax_label(const Matrix& probs);

} // namespace gear
