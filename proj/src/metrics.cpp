#include "gear/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "gear/error.hpp"

namespace gear {

std::vector<const Prediction*> align_predictions(std::span<const LabeledExample> examples,
                                                 std::span<const Prediction> predictions) {
    std::map<std::string_view, const Prediction*> by_id;
    for (const Prediction& p : predictions) by_id.emplace(p.id, &p);
    std::vector<const Prediction*> out;
    out.reserve(examples.size());
    std::string missing;
    std::size_t n_missing = 0;
    for (const LabeledExample& ex : examples) {
        auto it = by_id.find(ex.id);
        if (it == by_id.end()) {
            if (n_missing++ < 20) missing += (missing.empty() ? "" : ", ") + ex.id;
            out.push_back(nullptr);
        } else {
            out.push_back(it->second);
        }
    }
    if (n_missing > 0)
        throw ValidationError("missing predictions for " + std::to_string(n_missing) +
                              " example(s): " + missing + (n_missing > 20 ? ", ..." : ""));
    return out;
}

std::vector<SentenceId> capped_evidence(const Prediction& p) {
    const std::size_t n = std::min(p.evidence.size(), kMaxPredictedEvidence);
    std::vector<SentenceId> out(p.evidence.begin(), p.evidence.begin() + n);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool covers_gold_group(const LabeledExample& ex, std::span<const SentenceId> evidence) {
    for (const EvidenceGroup& g : ex.gold_groups) {
        bool all = !g.sentences.empty();
        for (const SentenceId& s : g.sentences)
            if (std::find(evidence.begin(), evidence.end(), s) == evidence.end()) {
                all = false;
                break;
            }
        if (all) return true;
    }
    return false;
}

namespace {

double fraction(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

double label_accuracy(std::span<const LabeledExample> examples,
                      std::span<const Prediction> predictions) {
    const auto preds = align_predictions(examples, predictions);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < examples.size(); ++i)
        if (preds[i]->label == examples[i].label) ++hit;
    return fraction(hit, examples.size());
}

double fever_score(std::span<const LabeledExample> examples,
                   std::span<const Prediction> predictions) {
    const auto preds = align_predictions(examples, predictions);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const LabeledExample& ex = examples[i];
        if (preds[i]->label != ex.label) continue;
        if (ex.label == Label::Nei || covers_gold_group(ex, capped_evidence(*preds[i]))) ++hit;
    }
    return fraction(hit, examples.size());
}

double ofever_score(std::span<const LabeledExample> examples,
                    std::span<const Prediction> predictions) {
    const auto preds = align_predictions(examples, predictions);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const LabeledExample& ex = examples[i];
        if (ex.label == Label::Nei || covers_gold_group(ex, capped_evidence(*preds[i]))) ++hit;
    }
    return fraction(hit, examples.size());
}

EvidencePrf evidence_prf(std::span<const LabeledExample> examples,
                         std::span<const Prediction> predictions) {
    const auto preds = align_predictions(examples, predictions);
    std::size_t returned = 0, correct = 0, gold_total = 0, gold_found = 0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const LabeledExample& ex = examples[i];
        if (ex.label == Label::Nei) continue;
        std::set<SentenceId> gold;
        for (const EvidenceGroup& g : ex.gold_groups) gold.insert(g.sentences.begin(), g.sentences.end());
        const std::vector<SentenceId> ev = capped_evidence(*preds[i]);
        returned += ev.size();
        for (const SentenceId& s : ev)
            if (gold.contains(s)) ++correct;
        gold_total += gold.size();
        for (const SentenceId& s : gold)
            if (std::binary_search(ev.begin(), ev.end(), s)) ++gold_found;
    }
    EvidencePrf r;
    r.precision = fraction(correct, returned);
    r.recall = fraction(gold_found, gold_total);
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

EvaluationReport evaluate(std::span<const LabeledExample> examples,
                          std::span<const Prediction> predictions) {
    const auto preds = align_predictions(examples, predictions);
    EvaluationReport r;
    r.num_examples = examples.size();
    r.label_accuracy = label_accuracy(examples, predictions);
    r.fever_score = fever_score(examples, predictions);
    r.ofever_score = ofever_score(examples, predictions);
    const EvidencePrf prf = evidence_prf(examples, predictions);
    r.evidence_precision = prf.precision;
    r.evidence_recall = prf.recall;
    r.evidence_f1 = prf.f1;
    for (std::size_t i = 0; i < examples.size(); ++i)
        ++r.confusion[index_of(examples[i].label)][index_of(preds[i]->label)];
    return r;
}

nlohmann::ordered_json to_json(const EvaluationReport& r) {
    nlohmann::ordered_json conf = nlohmann::ordered_json::object();
    for (Label g : kAllLabels) {
        nlohmann::ordered_json row = nlohmann::ordered_json::object();
        for (Label p : kAllLabels) row[std::string(label_name(p))] = r.confusion[index_of(g)][index_of(p)];
        conf[std::string(label_name(g))] = row;
    }
    nlohmann::ordered_json j;
    j["num_examples"] = r.num_examples;
    j["label_accuracy"] = r.label_accuracy;
    j["fever_score"] = r.fever_score;
    j["ofever_score"] = r.ofever_score;
    j["evidence_precision"] = r.evidence_precision;
    j["evidence_recall"] = r.evidence_recall;
    j["evidence_f1"] = r.evidence_f1;
    j["confusion"] = conf;
    return j;
}

std::string to_text_table(const EvaluationReport& r) {
    std::ostringstream out;
    char buf[96];
    auto row = [&](const char* name, double v) {
        std::snprintf(buf, sizeof buf, "%-20s %8.2f%%\n", name, 100.0 * v);
        out << buf;
    };
    std::snprintf(buf, sizeof buf, "%-20s %9zu\n", "examples", r.num_examples);
    out << buf;
    row("label accuracy", r.label_accuracy);
    row("FEVER score", r.fever_score);
    row("OFEVER score", r.ofever_score);
    row("evidence precision", r.evidence_precision);
    row("evidence recall", r.evidence_recall);
    row("evidence F1", r.evidence_f1);
    out << "\nconfusion (rows gold, columns predicted)\n";
    std::snprintf(buf, sizeof buf, "%-10s %10s %10s %10s\n", "", "SUPPORTED", "REFUTED", "NEI");
    out << buf;
    for (Label g : kAllLabels) {
        const auto& c = r.confusion[index_of(g)];
        std::snprintf(buf, sizeof buf, "%-10s %10zu %10zu %10zu\n",
                      std::string(label_name(g)).c_str(), c[0], c[1], c[2]);
        out << buf;
    }
    return out.str();
}

} // namespace gear
