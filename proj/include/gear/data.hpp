#pragma once
// FEVER-format ingestion, prediction files, the synthetic two-hop task and
// the difficult / evidence-enhanced subset builders.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gear/dataset.hpp"
#include "gear/metrics.hpp"
#include "gear/retrieval.hpp"

namespace gear {

// FEVER claim records:
// {"id", "claim", "label", "evidence": [[[ann_id, ev_id, doc, line], ...], ...]}
// Evidence is resolved against the corpus; unresolved sentences keep their
// identifiers with empty text and resolved == false.
DatasetSplit parse_fever_jsonl(std::string_view text, const Corpus& corpus,
                               const std::string& split_name = "dev",
                               const std::string& source = "<memory>");
DatasetSplit load_fever_jsonl(const std::filesystem::path& path, const Corpus& corpus,
                              const std::string& split_name = "dev");

// Inverse of parse_fever_jsonl up to normalization: annotation ids are
// written as null, integer-looking ids are written as numbers, and NEI
// records carry [[[null, null, null, null]]].
std::string to_fever_jsonl(const DatasetSplit& split);

// {"id", "predicted_label", "predicted_evidence": [[doc, line], ...]}
std::string to_prediction_jsonl(std::span<const Prediction> predictions);
std::vector<Prediction> parse_prediction_jsonl(std::string_view text,
                                               const std::string& source = "<memory>");
std::vector<Prediction> load_prediction_jsonl(const std::filesystem::path& path);

// Selected evidence per example:
// {"id", "evidence": [[doc, line, score], ...]}
std::string to_evidence_jsonl(const DatasetSplit& split);
// Copy of split whose retrieved lists come from the file. Every example must
// have a record and every sentence must resolve in the corpus (else
// ValidationError); records for unknown ids are ignored.
DatasetSplit apply_evidence_jsonl(const DatasetSplit& split, std::string_view text,
                                  const Corpus& corpus, const std::string& source = "<memory>");

// ---- synthetic two-hop task ----
//
// Each world is a region. Its climate document says Paris and Rome have
// opposite climates (easy worlds list only one of them); one document per
// resident says which city they live in. Claims read "<name> of <region>
// lives in a city with a <climate> climate". SUPPORTED / REFUTED need the
// resident's line and the climate line of that city. NEI claims are about
// residents of Lima, which never has a climate line.

struct SyntheticConfig {
    std::size_t num_examples = 1000;
    std::size_t dev_examples = 0;
    std::uint64_t seed = 1;
    std::size_t facts_per_world = 1; // residents (claims) per region
    double nei_fraction = 1.0 / 3.0;
    // Share of regions whose climate doc lists only one city.
    double easy_fraction = 0.5;

    void validate() const;
};

struct SyntheticData {
    Corpus corpus;
    DatasetSplit train;
    DatasetSplit dev;
};

SyntheticData generate_synthetic(const SyntheticConfig& cfg);

// Evaluates the generator's rules over a bag of sentences. Returns the label
// the sentences prove, or nullopt when they do not settle the claim.
std::optional<Label> synthetic_rule_label(std::string_view claim,
                                          std::span<const std::string> sentences);

// Words the generator uses, exposed for collision checks in tests.
std::vector<std::string_view> synthetic_city_words();
std::span<const std::string_view> synthetic_semantic_words();

// ---- subsets ----

// Keeps NEI examples and examples where every gold group has >= 2 sentences.
DatasetSplit build_difficult_subset(const DatasetSplit& split);

// Per example: gold sentences are added at score 1.0 to the candidates
// (duplicates keep the max score), then select_evidence(., tau) is re-run.
// candidates[i] belongs to split.examples[i].
DatasetSplit build_evidence_enhanced(const DatasetSplit& split,
                                     std::span<const std::vector<EvidenceSentence>> candidates,
                                     double tau);

// Retrieval + scoring for every example (all lines of retrieved documents).
std::vector<std::vector<EvidenceSentence>> score_split(const DatasetSplit& split,
                                                       const Corpus& corpus,
                                                       const SelectorEnsemble& selector,
                                                       std::size_t docs_per_query = kDefaultDocsPerQuery);

// Copy of split with retrieved = select_evidence(candidates[i], tau).
DatasetSplit with_selected_evidence(const DatasetSplit& split,
                                    std::span<const std::vector<EvidenceSentence>> candidates,
                                    double tau);

} // namespace gear
