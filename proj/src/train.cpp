#include "gear/train.hpp"

#include <cmath>
#include <numeric>

#include "gear/error.hpp"
#include "gear/io.hpp"
#include "gear/kernels.hpp"

namespace gear {

using nlohmann::ordered_json;

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("learning_rate must be a finite value >= 0");
    if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay))
        throw ConfigError("weight_decay must be a finite value >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
}

Var nll_loss(Var probs, Label gold) {
    return ad::neg_log_clamped(ad::pick(probs, index_of(gold)), kProbFloor);
}

Adam::Adam(std::span<Parameter* const> params, double learning_rate)
    : params_(params.begin(), params.end()), lr_(learning_rate) {
    for (const Parameter* p : params_) {
        m_.push_back(Matrix::zeros_like(p->value));
        v_.push_back(Matrix::zeros_like(p->value));
    }
}

void Adam::rebind(std::span<Parameter* const> params) {
    if (params.size() != params_.size())
        throw ContractError("Adam::rebind: parameter count changed");
    for (std::size_t i = 0; i < params.size(); ++i)
        if (params[i]->value.rows() != m_[i].rows() || params[i]->value.cols() != m_[i].cols())
            throw ContractError("Adam::rebind: shape of '" + params[i]->name + "' changed");
    params_.assign(params.begin(), params.end());
}

void Adam::step(double weight_decay) {
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    // m_hat / (sqrt(v_hat) + eps) == (sqrt(bc2) / bc1) * m / (sqrt(v) + eps * sqrt(bc2))
    const double lr_t = lr_ * std::sqrt(bc2) / bc1;
    const double eps_t = kEps * std::sqrt(bc2);
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Parameter& p = *params_[i];
        const std::size_t n = p.value.size();
        scratch_.assign(p.grad.data(), p.grad.data() + n);
        if (weight_decay != 0.0) k.axpy(weight_decay, p.value.data(), scratch_.data(), n);
        k.adam_update(p.value.data(), scratch_.data(), m_[i].data(), v_[i].data(), n, kBeta1,
                      kBeta2, lr_t, eps_t);
        p.zero_grad();
    }
}

bool EarlyStopping::observe(double accuracy) {
    ++epochs_;
    if (accuracy > best_) {
        best_ = accuracy;
        best_epoch_ = epochs_;
        since_best_ = 0;
        return true;
    }
    ++since_best_;
    return false;
}

VerifierInput verifier_input(const LabeledExample& ex) {
    VerifierInput in{ex.id, ex.claim, {}};
    in.evidence.reserve(ex.retrieved.size());
    for (const EvidenceSentence& s : ex.retrieved) in.evidence.push_back(s.text);
    return in;
}

TrainState make_train_state(const GearConfig& model, const TrainConfig& train) {
    train.validate();
    TrainState st{init_gear_params(model, train.seed), {}, EarlyStopping(train.patience), 0};
    st.optimizer = Adam(st.params.all(), train.learning_rate);
    return st;
}

double train_epoch(TrainState& state, const GearConfig& model, const TrainConfig& train,
                   const DatasetSplit& split, const PrecomputedFeatures* precomputed) {
    if (split.examples.empty()) throw ValidationError("train_epoch: empty split");
    ++state.epoch;
    std::vector<std::size_t> order(split.examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(train.seed, 0x5eed0000ULL + state.epoch));
    rng.shuffle(order);

    std::vector<Parameter*> params = state.params.all();
    state.params.zero_grad();
    double loss_sum = 0.0;
    std::size_t used = 0, in_batch = 0;
    auto flush = [&] {
        if (in_batch == 0) return;
        const double inv = 1.0 / static_cast<double>(in_batch);
        for (Parameter* p : params)
            for (std::size_t j = 0; j < p->grad.size(); ++j) p->grad[j] *= inv;
        state.optimizer.step(train.weight_decay);
        in_batch = 0;
    };
    for (std::size_t idx : order) {
        const LabeledExample& ex = split.examples[idx];
        if (ex.retrieved.empty()) continue;
        Tape tape;
        const BoundGear bound = bind(tape, model, state.params);
        const ForwardPass fp = forward(tape, model, bound, verifier_input(ex), precomputed);
        const Var loss = nll_loss(fp.probs, ex.label);
        tape.backward(loss);
        loss_sum += loss.scalar();
        ++used;
        if (++in_batch == train.batch_size) flush();
    }
    flush();
    return used == 0 ? 0.0 : loss_sum / static_cast<double>(used);
}

Prediction predict_example(const GearConfig& model, GearParams& params, const LabeledExample& ex,
                           const PrecomputedFeatures* precomputed) {
    Prediction p{ex.id, Label::Nei, {}};
    for (const EvidenceSentence& s : ex.retrieved) p.evidence.push_back(s.id());
    if (!ex.retrieved.empty()) p.label = predict(model, params, verifier_input(ex), precomputed).predicted;
    return p;
}

std::vector<Prediction> predict_split(const GearConfig& model, GearParams& params,
                                      const DatasetSplit& split,
                                      const PrecomputedFeatures* precomputed) {
    std::vector<Prediction> out;
    out.reserve(split.examples.size());
    for (const LabeledExample& ex : split.examples)
        out.push_back(predict_example(model, params, ex, precomputed));
    return out;
}

FitResult fit(const GearConfig& model, const TrainConfig& train, const DatasetSplit& train_split,
              const DatasetSplit& dev_split, const PrecomputedFeatures* precomputed) {
    if (dev_split.examples.empty()) throw ValidationError("fit: dev split is empty");
    TrainState st = make_train_state(model, train);
    FitResult best{st.params, {}};
    for (std::size_t e = 0; e < train.max_epochs; ++e) {
        EpochRecord rec;
        rec.train_loss = train_epoch(st, model, train, train_split, precomputed);
        rec.epoch = st.epoch;
        const std::vector<Prediction> preds = predict_split(model, st.params, dev_split, precomputed);
        rec.dev_label_accuracy = label_accuracy(dev_split.examples, preds);
        rec.dev_fever_score = fever_score(dev_split.examples, preds);
        best.history.epochs.push_back(rec);
        if (st.stopper.observe(rec.dev_label_accuracy)) {
            best.params = st.params;
            best.history.best_epoch = rec.epoch;
            best.history.best_dev_label_accuracy = rec.dev_label_accuracy;
            best.history.best_dev_fever_score = rec.dev_fever_score;
        }
        if (st.stopper.should_stop()) {
            best.history.stopped_early = true;
            break;
        }
    }
    return best;
}

// ---- serialization ----

ordered_json to_json(const GearConfig& c) {
    ordered_json j;
    j["encoder"] = std::string(encoder_kind_name(c.encoder.kind));
    j["feature_dim"] = c.encoder.feature_dim;
    j["buckets"] = c.encoder.buckets;
    j["hash_seed"] = c.encoder.hash_seed;
    j["hidden_dim"] = c.hidden_dim;
    j["layers"] = c.num_layers;
    j["aggregator"] = std::string(aggregator_name(c.aggregator));
    j["classifier_relu"] = c.classifier_relu;
    j["classifier_bias_init"] = c.classifier_bias_init;
    return j;
}

GearConfig gear_config_from_json(const ordered_json& j) {
    GearConfig c;
    c.encoder.kind = parse_encoder_kind(j.at("encoder").get<std::string>());
    c.encoder.feature_dim = j.at("feature_dim").get<std::size_t>();
    c.encoder.buckets = j.at("buckets").get<std::size_t>();
    c.encoder.hash_seed = j.at("hash_seed").get<std::uint64_t>();
    c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    c.num_layers = j.at("layers").get<std::size_t>();
    c.aggregator = parse_aggregator(j.at("aggregator").get<std::string>());
    c.classifier_relu = j.at("classifier_relu").get<bool>();
    c.classifier_bias_init = j.at("classifier_bias_init").get<double>();
    c.validate();
    return c;
}

ordered_json to_json(const TrainConfig& c) {
    ordered_json j;
    j["learning_rate"] = c.learning_rate;
    j["weight_decay"] = c.weight_decay;
    j["batch_size"] = c.batch_size;
    j["patience"] = c.patience;
    j["max_epochs"] = c.max_epochs;
    j["seed"] = c.seed;
    return j;
}

TrainConfig train_config_from_json(const ordered_json& j) {
    TrainConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.patience = j.at("patience").get<std::size_t>();
    c.max_epochs = j.at("max_epochs").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
}

namespace {

constexpr int kCheckpointVersion = 1;

ordered_json history_json(const TrainHistory& h) {
    ordered_json j;
    j["best_epoch"] = h.best_epoch;
    j["best_dev_label_accuracy"] = h.best_dev_label_accuracy;
    j["best_dev_fever_score"] = h.best_dev_fever_score;
    j["stopped_early"] = h.stopped_early;
    ordered_json epochs = ordered_json::array();
    for (const EpochRecord& r : h.epochs)
        epochs.push_back({{"epoch", r.epoch},
                          {"train_loss", r.train_loss},
                          {"dev_label_accuracy", r.dev_label_accuracy},
                          {"dev_fever_score", r.dev_fever_score}});
    j["epochs"] = std::move(epochs);
    return j;
}

TrainHistory history_from_json(const ordered_json& j) {
    TrainHistory h;
    h.best_epoch = j.at("best_epoch").get<std::size_t>();
    h.best_dev_label_accuracy = j.at("best_dev_label_accuracy").get<double>();
    h.best_dev_fever_score = j.at("best_dev_fever_score").get<double>();
    h.stopped_early = j.at("stopped_early").get<bool>();
    for (const auto& r : j.at("epochs"))
        h.epochs.push_back({r.at("epoch").get<std::size_t>(), r.at("train_loss").get<double>(),
                            r.at("dev_label_accuracy").get<double>(),
                            r.at("dev_fever_score").get<double>()});
    return h;
}

} // namespace

std::string checkpoint_to_string(const Checkpoint& c) {
    ordered_json j;
    j["format"] = "gear-checkpoint";
    j["version"] = kCheckpointVersion;
    j["model"] = to_json(c.model);
    j["train"] = to_json(c.train);
    ordered_json params = ordered_json::array();
    for (const Parameter* p : c.params.all()) {
        const Matrix& m = p->value;
        params.push_back({{"name", p->name},
                          {"rows", m.rows()},
                          {"cols", m.cols()},
                          {"data", std::vector<double>(m.data(), m.data() + m.size())}});
    }
    j["params"] = std::move(params);
    j["history"] = history_json(c.history);
    return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text, const std::string& source) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(source, 1, std::string("checkpoint is not JSON: ") + e.what());
    }
    try {
        if (j.at("format") != "gear-checkpoint")
            throw ValidationError(source + ": not a checkpoint file");
        if (j.at("version").get<int>() != kCheckpointVersion)
            throw ValidationError(source + ": unsupported checkpoint version");
        Checkpoint c;
        c.model = gear_config_from_json(j.at("model"));
        c.train = train_config_from_json(j.at("train"));
        c.params = init_gear_params(c.model, 0);
        std::vector<Parameter*> params = c.params.all();
        const auto& saved = j.at("params");
        if (saved.size() != params.size())
            throw ValidationError(source + ": expected " + std::to_string(params.size()) +
                                  " parameter matrices, found " + std::to_string(saved.size()));
        for (std::size_t i = 0; i < params.size(); ++i) {
            const auto& s = saved[i];
            Parameter& p = *params[i];
            if (s.at("name").get<std::string>() != p.name)
                throw ValidationError(source + ": parameter " + std::to_string(i) + " is '" +
                                      s.at("name").get<std::string>() + "', expected '" + p.name + "'");
            const auto rows = s.at("rows").get<std::size_t>();
            const auto cols = s.at("cols").get<std::size_t>();
            auto data = s.at("data").get<std::vector<double>>();
            if (rows != p.value.rows() || cols != p.value.cols() || data.size() != rows * cols)
                throw DimensionError(source + ": parameter '" + p.name + "' has shape " +
                                     std::to_string(rows) + "x" + std::to_string(cols) +
                                     ", expected " + p.value.shape_string());
            p.value = Matrix(rows, cols, std::move(data));
            p.grad = Matrix::zeros_like(p.value);
        }
        c.history = history_from_json(j.at("history"));
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(source + ": malformed checkpoint: " + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    write_file(path, checkpoint_to_string(c));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return checkpoint_from_string(read_file(path), path.string());
}

} // namespace gear
