#pragma once
// End-to-end run: retrieval -> selection(tau) -> verification -> scoring.
// Pure with respect to the filesystem except for reading the inputs; the CLI
// owns every output file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gear/data.hpp"
#include "gear/metrics.hpp"
#include "gear/retrieval.hpp"
#include "gear/train.hpp"

namespace gear {

inline constexpr double kDefaultTau = 1e-3;
inline constexpr std::array<double, 5> kTauSweep{0.0, 1e-4, 1e-3, 1e-2, 1e-1};

struct PipelineOptions {
    std::filesystem::path corpus;
    std::filesystem::path train;
    std::filesystem::path dev;
    // Preselected evidence for train and dev examples; skips retrieval and selection.
    std::optional<std::filesystem::path> evidence;
    // Required when model.encoder.kind is Precomputed.
    std::optional<std::filesystem::path> features;
    // Evaluate this checkpoint instead of training.
    std::optional<std::filesystem::path> load_checkpoint;

    double tau = kDefaultTau;
    GearConfig model;
    TrainConfig train_config;
    SelectorTrainConfig selector;
    std::size_t docs_per_query = kDefaultDocsPerQuery;
    // Empty means {train_config.seed}.
    std::vector<std::uint64_t> seeds;
    bool tau_sweep = false;
    // Dev example whose attention maps are exported; the first dev example when empty.
    bool export_attention = false;
    std::string export_id;

    void validate() const;
};

struct SeedRun {
    std::uint64_t seed = 0;
    std::size_t epochs = 0;
    std::size_t best_epoch = 0;
    double dev_label_accuracy = 0.0;
    double dev_fever_score = 0.0;
};

struct TauSweepRow {
    double tau = 0.0;
    double ofever = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double mean_evidence = 0.0;
};

struct PipelineResult {
    DatasetSplit train;
    DatasetSplit dev;
    std::vector<Prediction> predictions; // dev, from the selected run
    EvaluationReport report;
    Checkpoint checkpoint;
    std::vector<SeedRun> runs;
    std::size_t selected_run = 0; // highest dev FEVER score, first on ties
    std::vector<TauSweepRow> tau_sweep;
    std::optional<std::string> attention_csv;
};

PipelineResult run_pipeline(const PipelineOptions& options);

// Evidence-only metrics of select_evidence(candidates, tau) for every tau.
std::vector<TauSweepRow> sweep_tau(const DatasetSplit& split,
                                   std::span<const std::vector<EvidenceSentence>> candidates,
                                   std::span<const double> taus);

// Attention maps of one example as CSV text: T blocks of N rows (one ERNet
// layer each, row i = attention of node i over all nodes) followed by one
// aggregator row when the aggregator is attention. Values use %.17g.
std::string attention_csv(const GearConfig& model, GearParams& params, const LabeledExample& ex,
                          const PrecomputedFeatures* precomputed = nullptr);

nlohmann::ordered_json to_json(const SeedRun& r);
nlohmann::ordered_json to_json(const TauSweepRow& r);
std::string tau_sweep_table(std::span<const TauSweepRow> rows);

} // namespace gear
