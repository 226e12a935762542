#pragma once

#include <compare>
#include <string>
#include <vector>

#include "gear/label.hpp"

namespace gear {

// (document, line) identity of a corpus sentence.
struct SentenceId {
    std::string doc;
    int line = 0;

    friend auto operator<=>(const SentenceId&, const SentenceId&) = default;
};

struct EvidenceSentence {
    std::string doc_name;
    int line_num = 0;
    std::string text;
    double score = 0.0;

    SentenceId id() const { return {doc_name, line_num}; }
    friend bool operator==(const EvidenceSentence&, const EvidenceSentence&) = default;
};

// Sentences that together fully verify a claim.
struct EvidenceGroup {
    std::vector<SentenceId> sentences;
    // Parallel to sentences: resolved corpus text, empty when unresolved.
    std::vector<std::string> texts;
    std::vector<bool> resolved;

    friend bool operator==(const EvidenceGroup&, const EvidenceGroup&) = default;
};

struct LabeledExample {
    std::string id;
    std::string claim;
    Label label = Label::Nei;
    std::vector<EvidenceGroup> gold_groups;
    std::vector<EvidenceSentence> retrieved;

    friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct DatasetSplit {
    std::string name;
    std::vector<LabeledExample> examples;

    // Throws ValidationError on duplicate ids, NEI examples with gold groups,
    // or empty groups.
    void validate() const;
};

} // namespace gear
