#pragma once
// Label accuracy, FEVER / OFEVER scores and evidence precision/recall/F1.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gear/dataset.hpp"

namespace gear {

inline constexpr std::size_t kMaxPredictedEvidence = 5;

struct Prediction {
    std::string id;
    Label label = Label::Nei;
    std::vector<SentenceId> evidence;

    friend bool operator==(const Prediction&, const Prediction&) = default;
};

// Predictions matched to examples by id. Throws ValidationError listing every
// example id that has no prediction.
std::vector<const Prediction*> align_predictions(std::span<const LabeledExample> examples,
                                                 std::span<const Prediction> predictions);

// First five predicted sentences as a set.
std::vector<SentenceId> capped_evidence(const Prediction& p);

// True iff some gold group is a subset of the (capped) evidence.
bool covers_gold_group(const LabeledExample& ex, std::span<const SentenceId> evidence);

double label_accuracy(std::span<const LabeledExample> examples,
                      std::span<const Prediction> predictions);
double fever_score(std::span<const LabeledExample> examples,
                   std::span<const Prediction> predictions);
// Labels in predictions are ignored: the label is assumed correct.
double ofever_score(std::span<const LabeledExample> examples,
                    std::span<const Prediction> predictions);

struct EvidencePrf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Micro-averaged over non-NEI examples. Precision counts only returned
// sentences; an empty returned set contributes nothing to its denominator.
EvidencePrf evidence_prf(std::span<const LabeledExample> examples,
                         std::span<const Prediction> predictions);

struct EvaluationReport {
    std::size_t num_examples = 0;
    double label_accuracy = 0.0;
    double fever_score = 0.0;
    double ofever_score = 0.0;
    double evidence_precision = 0.0;
    double evidence_recall = 0.0;
    double evidence_f1 = 0.0;
    // confusion[gold][predicted]
    std::array<std::array<std::size_t, kNumLabels>, kNumLabels> confusion{};
};

EvaluationReport evaluate(std::span<const LabeledExample> examples,
                          std::span<const Prediction> predictions);

nlohmann::ordered_json to_json(const EvaluationReport& r);
std::string to_text_table(const EvaluationReport& r);

} // namespace gear
