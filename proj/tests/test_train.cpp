#include "doctest.h"

#include <cmath>
#include <vector>

#include "gear/data.hpp"
#include "gear/error.hpp"
#include "gear/gradcheck.hpp"
#include "gear/train.hpp"

using namespace gear;

namespace {

GearConfig tiny_model() {
    GearConfig cfg;
    cfg.encoder.feature_dim = 8;
    cfg.encoder.buckets = 64;
    cfg.hidden_dim = 8;
    return cfg;
}

// Synthetic split with gold evidence attached as the retrieved set.
std::pair<DatasetSplit, DatasetSplit> tiny_splits(std::size_t n_train, std::size_t n_dev) {
    SyntheticConfig sc;
    sc.num_examples = n_train;
    sc.dev_examples = n_dev;
    sc.seed = 2;
    const SyntheticData d = generate_synthetic(sc);
    std::vector<std::vector<EvidenceSentence>> none_t(d.train.examples.size()), none_d(d.dev.examples.size());
    return {build_evidence_enhanced(d.train, none_t, 1e-3), build_evidence_enhanced(d.dev, none_d, 1e-3)};
}

bool same_params(const GearParams& a, const GearParams& b) {
    const auto pa = a.all();
    const auto pb = b.all();
    if (pa.size() != pb.size()) return false;
    for (std::size_t i = 0; i < pa.size(); ++i)
        if (!(pa[i]->value == pb[i]->value)) return false;
    return true;
}

} // namespace

TEST_SUITE("train") {

TEST_CASE("nll examples") {
    Tape t;
    const double third = 1.0 / 3;
    Var uniform = t.constant(Matrix{{third}, {third}, {third}});
    for (Label l : kAllLabels) CHECK(nll_loss(uniform, l).scalar() == doctest::Approx(std::log(3.0)));
    Var sure = t.constant(Matrix{{1}, {0}, {0}});
    CHECK(std::abs(nll_loss(sure, Label::Supported).scalar()) < 1e-12);
    CHECK(nll_loss(sure, Label::Nei).scalar() == doctest::Approx(-std::log(kProbFloor)));
}

TEST_CASE("nll gradient matches finite differences") {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix p(3, 1);
        for (double& v : p.values()) v = rng.uniform(0.05, 1.0);
        Parameter probs("p", p);
        Parameter* ps[] = {&probs};
        const Label gold = kAllLabels[rng.below(3)];
        const GradCheckReport r =
            check_gradients([&](Tape& t) { return nll_loss(t.param(probs), gold); }, ps, 1e-5, 1e-4);
        CHECK(r.passed);
    }
}

TEST_CASE("zero learning rate leaves parameters alone") {
    const auto [train, dev] = tiny_splits(8, 4);
    const GearConfig model = tiny_model();
    TrainConfig tc;
    tc.learning_rate = 0.0;
    TrainState state = make_train_state(model, tc);
    const GearParams before = init_gear_params(model, tc.seed);
    CHECK(same_params(state.params, before));
    train_epoch(state, model, tc, train);
    train_epoch(state, model, tc, train);
    CHECK(same_params(state.params, before));
}

TEST_CASE("single example is fitted") {
    auto [train, dev] = tiny_splits(6, 2);
    DatasetSplit one;
    one.name = "train";
    for (const auto& ex : train.examples)
        if (ex.label == Label::Refuted && one.examples.empty()) one.examples.push_back(ex);
    REQUIRE(one.examples.size() == 1);
    const GearConfig model = tiny_model();
    TrainConfig tc;
    tc.batch_size = 1;
    TrainState state = make_train_state(model, tc);
    std::vector<double> losses;
    for (int step = 0; step < 200; ++step) losses.push_back(train_epoch(state, model, tc, one));
    int non_increasing = 0;
    for (std::size_t i = 1; i < losses.size(); ++i) non_increasing += losses[i] <= losses[i - 1];
    CHECK(non_increasing >= 0.95 * (losses.size() - 1));
    CHECK(losses.back() < 0.05);
}

TEST_CASE("same seed gives bit-identical parameters") {
    const auto [train, dev] = tiny_splits(24, 8);
    const GearConfig model = tiny_model();
    TrainConfig tc;
    tc.max_epochs = 3;
    const FitResult a = fit(model, tc, train, dev);
    const FitResult b = fit(model, tc, train, dev);
    CHECK(same_params(a.params, b.params));
    tc.seed = 2;
    const FitResult c = fit(model, tc, train, dev);
    CHECK_FALSE(same_params(a.params, c.params));
}

TEST_CASE("early stopping arithmetic") {
    EarlyStopping s(20);
    std::vector<double> acc{0.5, 0.6};
    for (int i = 0; i < 30; ++i) acc.push_back(0.6);
    std::size_t stopped_at = 0;
    for (double a : acc) {
        s.observe(a);
        if (s.should_stop()) {
            stopped_at = s.epochs_seen();
            break;
        }
    }
    CHECK(stopped_at == 22);
    CHECK(s.best_epoch() == 2);
    CHECK(s.best() == 0.6);

    EarlyStopping p(1);
    CHECK(p.observe(0.5));
    CHECK_FALSE(p.should_stop());
    CHECK_FALSE(p.observe(0.4));
    CHECK(p.should_stop());
    CHECK(p.epochs_seen() == 2);
    CHECK(p.best_epoch() == 1);
}

TEST_CASE("fit returns the best-epoch snapshot") {
    const auto [train, dev] = tiny_splits(24, 12);
    const GearConfig model = tiny_model();
    TrainConfig tc;
    tc.max_epochs = 6;
    tc.patience = 2;
    FitResult r = fit(model, tc, train, dev);
    REQUIRE(r.history.best_epoch >= 1);
    const auto preds = predict_split(model, r.params, dev);
    CHECK(label_accuracy(dev.examples, preds) == r.history.best_dev_label_accuracy);
    CHECK(r.history.epochs.size() <= 6);
}

TEST_CASE("adam step with tiny lr moves parameters by O(lr)") {
    const auto [train, dev] = tiny_splits(4, 2);
    const GearConfig model = tiny_model();
    TrainConfig tc;
    tc.weight_decay = 0.0;
    tc.learning_rate = 1e-9;
    tc.batch_size = 1;
    TrainState state = make_train_state(model, tc);
    const GearParams before = init_gear_params(model, tc.seed);
    train_epoch(state, model, tc, train);
    const auto a = state.params.all();
    const auto b = before.all();
    double moved = 0;
    for (std::size_t i = 0; i < a.size(); ++i) moved = std::max(moved, max_abs_diff(a[i]->value, b[i]->value));
    CHECK(moved > 0.0);
    CHECK(moved <= 10 * 1e-9);
}

TEST_CASE("examples without evidence are predicted NEI") {
    GearConfig model = tiny_model();
    GearParams p = init_gear_params(model, 1);
    LabeledExample ex;
    ex.id = "q";
    ex.claim = "some claim";
    ex.label = Label::Supported;
    const Prediction pred = predict_example(model, p, ex);
    CHECK(pred.label == Label::Nei);
    CHECK(pred.evidence.empty());
}

TEST_CASE("checkpoint bytes are stable") {
    const auto [train, dev] = tiny_splits(16, 8);
    const GearConfig model = tiny_model();
    TrainConfig tc;
    tc.max_epochs = 2;
    FitResult r = fit(model, tc, train, dev);
    const Checkpoint c{model, tc, std::move(r.params), r.history};
    const std::string text = checkpoint_to_string(c);
    const Checkpoint back = checkpoint_from_string(text);
    CHECK(checkpoint_to_string(back) == text);
    CHECK(same_params(back.params, c.params));
    CHECK_THROWS_AS(checkpoint_from_string("{\"format\": \"other\"}"), ValidationError);
    CHECK_THROWS_AS(checkpoint_from_string("not json"), ParseError);
}

TEST_CASE("config validation") {
    TrainConfig tc;
    tc.batch_size = 0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    GearConfig g;
    g.num_layers = 4;
    CHECK_THROWS_AS(g.validate(), ConfigError);
}

}
