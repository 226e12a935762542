#pragma once
// Offline document retrieval by title overlap, a linear overlap-feature
// sentence scorer trained with a pairwise hinge loss, and the top-5 / tau
// evidence filter.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gear/dataset.hpp"
#include "gear/random.hpp"

namespace gear {

struct Document {
    std::string name;
    std::vector<std::pair<int, std::string>> lines; // (line_num, text), line_num unique

    const std::string* line(int line_num) const;
};

class Corpus {
public:
    void add(Document doc);

    // One JSON object per line: {"id": name, "lines": "0\t<text>\n1\t<text>..."}.
    static Corpus parse_jsonl(std::string_view text, const std::string& source = "<memory>");
    static Corpus load_jsonl(const std::filesystem::path& path);
    std::string to_jsonl() const;

    const Document* find(std::string_view name) const;
    const std::string* text(const SentenceId& id) const;
    std::span<const Document> documents() const noexcept { return docs_; }
    std::size_t size() const noexcept { return docs_.size(); }
    bool empty() const noexcept { return docs_.empty(); }

    // Indices of documents whose title contains the token.
    const std::vector<std::size_t>* docs_with_title_token(const std::string& token) const;
    const std::vector<std::string>& title_tokens(std::size_t doc_index) const {
        return title_tokens_[doc_index];
    }

private:
    std::vector<Document> docs_;
    std::vector<std::vector<std::string>> title_tokens_;
    std::map<std::string, std::size_t, std::less<>> by_name_;
    std::map<std::string, std::vector<std::size_t>, std::less<>> title_index_;
};

inline constexpr std::size_t kDefaultDocsPerQuery = 7;

// Each distinct non-stopword claim token forms a query. A query's candidates
// are the documents whose title contains it, ranked by title/claim token
// overlap (desc), title length in tokens (asc), then name; the top k of every
// query are merged and returned in that same ranking.
std::vector<const Document*> retrieve_documents(std::string_view claim, const Corpus& corpus,
                                                std::size_t k = kDefaultDocsPerQuery);

inline constexpr std::size_t kNumSelectorFeatures = 4;
using SelectorFeatures = std::array<double, kNumSelectorFeatures>;

// In order: unigram overlap fraction, bigram overlap fraction,
// title-in-claim flag, length ratio.
SelectorFeatures selector_features(std::string_view claim, std::string_view doc_name,
                                   std::string_view sentence);

struct SelectorParams {
    SelectorFeatures weights{};
};

double logistic(double z);
double linear_score(const SelectorParams& p, const SelectorFeatures& f);
// logistic(w . f), in (0, 1).
double score_sentence(const SelectorParams& p, std::string_view claim, std::string_view doc_name,
                      std::string_view sentence);

// Averages replica scores.
struct SelectorEnsemble {
    std::vector<SelectorParams> replicas;

    double score(const SelectorFeatures& f) const;
    double score(std::string_view claim, std::string_view doc_name, std::string_view sentence) const;
};

// max(0, 1 + s_n - s_p)
inline double pair_hinge(double s_pos, double s_neg) { return std::max(0.0, 1.0 + s_neg - s_pos); }

struct SelectorPair {
    SelectorFeatures positive;
    SelectorFeatures negative;
};

struct SelectorTrainConfig {
    double learning_rate = 0.1;
    std::size_t epochs = 50;
    std::size_t negatives_per_positive = 1;
    std::size_t ensemble_size = 1;
    std::uint64_t seed = 1;
};

// Positive = every resolved gold sentence of a non-NEI example; negatives are
// drawn uniformly from the non-gold lines of that example's retrieved documents.
std::vector<SelectorPair> build_selector_pairs(const DatasetSplit& split, const Corpus& corpus,
                                               const SelectorTrainConfig& cfg,
                                               std::size_t docs_per_query = kDefaultDocsPerQuery);

// Sum of pair_hinge over pairs, on raw linear scores.
double total_hinge_loss(const SelectorParams& p, std::span<const SelectorPair> pairs);

// Per-pair subgradient descent on the hinge loss, one replica per seed.
SelectorEnsemble train_selector(std::span<const SelectorPair> pairs, const SelectorTrainConfig& cfg);
SelectorParams train_selector_replica(std::span<const SelectorPair> pairs, double learning_rate,
                                      std::size_t epochs, std::uint64_t seed);

// Every line of the retrieved documents, scored.
std::vector<EvidenceSentence> score_candidates(const SelectorEnsemble& selector,
                                               std::string_view claim,
                                               std::span<const Document* const> docs);

inline constexpr std::size_t kMaxEvidence = 5;

// Top 5 by score (ties: doc_name, then line_num), drop score < tau, fall back
// to the single best sentence when nothing survives. Sorted by score desc.
std::vector<EvidenceSentence> select_evidence(std::span<const EvidenceSentence> scored, double tau);

// Orders by score desc, doc_name asc, line_num asc.
bool evidence_rank_less(const EvidenceSentence& a, const EvidenceSentence& b);

} // namespace gear
