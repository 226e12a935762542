#include "gear/aggregator.hpp"

#include <string>

#include "gear/error.hpp"

namespace gear {

std::string_view aggregator_name(AggregatorKind k) {
    switch (k) {
    case AggregatorKind::Attention: return "attention";
    case AggregatorKind::Max: return "max";
    case AggregatorKind::Mean: return "mean";
    }
    return "unknown";
}

AggregatorKind parse_aggregator(std::string_view s) {
    if (s == "attention") return AggregatorKind::Attention;
    if (s == "max") return AggregatorKind::Max;
    if (s == "mean") return AggregatorKind::Mean;
    throw ConfigError("unknown aggregator '" + std::string(s) + "'");
}

AggregatorParams init_aggregator_params(AggregatorKind kind, std::size_t feature_dim,
                                        std::size_t hidden_dim, double classifier_bias_init,
                                        Rng& rng) {
    AggregatorParams p;
    p.kind = kind;
    if (kind == AggregatorKind::Attention) {
        p.att_w0 = Parameter("aggregator.w0", xavier_uniform(hidden_dim, 2 * feature_dim, rng));
        p.att_w1 = Parameter("aggregator.w1", xavier_uniform(1, hidden_dim, rng));
    }
    p.classifier_w = Parameter("classifier.w", xavier_uniform(kNumLabels, feature_dim, rng));
    p.classifier_b = Parameter("classifier.b", Matrix(kNumLabels, 1, classifier_bias_init));
    return p;
}

BoundAggregator bind(Tape& tape, AggregatorParams& p) {
    BoundAggregator b{p.kind, {}, {}, tape.param(p.classifier_w), tape.param(p.classifier_b)};
    if (p.kind == AggregatorKind::Attention) {
        b.att_w0 = tape.param(p.att_w0);
        b.att_w1 = tape.param(p.att_w1);
    }
    return b;
}

AggregateResult aggregate(const BoundAggregator& agg, Var claim_vec, std::span<const Var> states) {
    if (states.empty()) throw EmptyAggregationError("aggregate: no evidence states");
    switch (agg.kind) {
    case AggregatorKind::Max: return {ad::elementwise_max(states), std::nullopt};
    case AggregatorKind::Mean: return {ad::elementwise_mean(states), std::nullopt};
    case AggregatorKind::Attention: break;
    }
    const std::size_t n = states.size();
    if (claim_vec.rows() != states.front().rows() || claim_vec.cols() != 1)
        throw DimensionError("aggregate: claim vector " + claim_vec.value().shape_string() +
                             " vs state " + states.front().value().shape_string());
    std::vector<Var> logits;
    logits.reserve(n);
    for (const Var& h : states)
        logits.push_back(ad::matmul(agg.att_w1,
                                    ad::relu(ad::matmul(agg.att_w0, ad::concat_rows(claim_vec, h)))));
    const Var alpha = ad::softmax_vec(ad::concat_rows(logits));
    const Var o = ad::matmul(ad::stack_columns(states), alpha);
    const auto& a = alpha.value();
    return {o, std::vector<double>(a.data(), a.data() + a.size())};
}

Var classify(const BoundAggregator& agg, Var o, bool classifier_relu) {
    if (o.cols() != 1 || o.rows() != agg.classifier_w.cols())
        throw DimensionError("classify: o is " + o.value().shape_string() + ", W is " +
                             agg.classifier_w.value().shape_string());
    Var z = ad::add(ad::matmul(agg.classifier_w, o), agg.classifier_b);
    if (classifier_relu) z = ad::relu(z);
    return ad::softmax_vec(z);
}

Label argmax_label(const Matrix& probs) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size() && i < kNumLabels; ++i)
        if (probs[i] > probs[best]) best = i;
    return static_cast<Label>(best);
}

} // namespace gear
