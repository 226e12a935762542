#pragma once
// NLL training with Adam, L2 decay in the gradient, gradient accumulation
// over variable-size evidence graphs, and early stopping on dev accuracy.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gear/dataset.hpp"
#include "gear/metrics.hpp"
#include "gear/model.hpp"

namespace gear {

struct TrainConfig {
    double learning_rate = 5e-3;
    double weight_decay = 5e-4;
    std::size_t batch_size = 4;
    std::size_t patience = 20;
    std::size_t max_epochs = 200;
    std::uint64_t seed = 1;

    void validate() const;
};

inline constexpr double kProbFloor = 1e-12;

// -log(max(probs[gold], 1e-12))
Var nll_loss(Var probs, Label gold);

class Adam {
public:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;

    Adam() = default;
    Adam(std::span<Parameter* const> params, double learning_rate);

    // Applies g + weight_decay * w for every parameter, then zeroes grads.
    void step(double weight_decay);
    // Rebinds to the same-shaped parameters of another GearParams instance.
    void rebind(std::span<Parameter* const> params);

    std::size_t steps() const noexcept { return t_; }
    const std::vector<Matrix>& first_moments() const noexcept { return m_; }
    const std::vector<Matrix>& second_moments() const noexcept { return v_; }

private:
    std::vector<Parameter*> params_;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
    std::vector<double> scratch_;
    double lr_ = 0.0;
    std::size_t t_ = 0;
};

class EarlyStopping {
public:
    explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

    // Records one epoch's dev accuracy; true when it is a strict improvement.
    bool observe(double accuracy);
    bool should_stop() const noexcept { return since_best_ >= patience_; }

    double best() const noexcept { return best_; }
    std::size_t best_epoch() const noexcept { return best_epoch_; } // 1-based, 0 = none yet
    std::size_t epochs_seen() const noexcept { return epochs_; }
    std::size_t since_best() const noexcept { return since_best_; }

private:
    std::size_t patience_;
    double best_ = -1.0;
    std::size_t best_epoch_ = 0;
    std::size_t epochs_ = 0;
    std::size_t since_best_ = 0;
};

// Claim plus retrieved sentence texts, in retrieved order.
VerifierInput verifier_input(const LabeledExample& ex);

struct TrainState {
    GearParams params;
    Adam optimizer;
    EarlyStopping stopper{20};
    std::size_t epoch = 0;
};

TrainState make_train_state(const GearConfig& model, const TrainConfig& train);

// One pass over the split. Returns the mean NLL over examples that have
// evidence (examples without any retrieved sentence are skipped).
double train_epoch(TrainState& state, const GearConfig& model, const TrainConfig& train,
                   const DatasetSplit& split, const PrecomputedFeatures* precomputed = nullptr);

// Label plus retrieved evidence. Examples with no retrieved sentence are
// predicted NEI without running the verifier.
Prediction predict_example(const GearConfig& model, GearParams& params, const LabeledExample& ex,
                           const PrecomputedFeatures* precomputed = nullptr);
std::vector<Prediction> predict_split(const GearConfig& model, GearParams& params,
                                      const DatasetSplit& split,
                                      const PrecomputedFeatures* precomputed = nullptr);

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double dev_label_accuracy = 0.0;
    double dev_fever_score = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;
    double best_dev_label_accuracy = 0.0;
    double best_dev_fever_score = 0.0;
    bool stopped_early = false;
};

struct FitResult {
    GearParams params;
    TrainHistory history;
};

FitResult fit(const GearConfig& model, const TrainConfig& train, const DatasetSplit& train_split,
              const DatasetSplit& dev_split, const PrecomputedFeatures* precomputed = nullptr);

nlohmann::ordered_json to_json(const GearConfig& c);
GearConfig gear_config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::ordered_json& j);

struct Checkpoint {
    GearConfig model;
    TrainConfig train;
    GearParams params;
    TrainHistory history;
};

// Deterministic JSON text: same inputs give the same bytes.
std::string checkpoint_to_string(const Checkpoint& c);
Checkpoint checkpoint_from_string(const std::string& text, const std::string& source = "<memory>");
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace gear
