#include "gear/retrieval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "json.hpp"

#include "gear/error.hpp"
#include "gear/io.hpp"
#include "gear/text.hpp"

namespace gear {

const std::string* Document::line(int line_num) const {
    for (const auto& [n, t] : lines)
        if (n == line_num) return &t;
    return nullptr;
}

void Corpus::add(Document doc) {
    if (by_name_.contains(doc.name))
        throw ValidationError("corpus: duplicate document '" + doc.name + "'");
    std::set<int> seen;
    for (const auto& [n, t] : doc.lines)
        if (n < 0 || !seen.insert(n).second)
            throw ValidationError("corpus: document '" + doc.name + "' has bad or repeated line " +
                                  std::to_string(n));
    const std::size_t idx = docs_.size();
    by_name_.emplace(doc.name, idx);
    std::vector<std::string> toks;
    for (std::string& t : tokenize(doc.name))
        if (std::find(toks.begin(), toks.end(), t) == toks.end()) toks.push_back(std::move(t));
    for (const std::string& t : toks)
        if (!is_stopword(t)) title_index_[t].push_back(idx);
    title_tokens_.push_back(std::move(toks));
    docs_.push_back(std::move(doc));
}

Corpus Corpus::parse_jsonl(std::string_view text, const std::string& source) {
    Corpus c;
    std::size_t line_no = 0, start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        if (raw.find_first_not_of(" \t") == std::string_view::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(raw);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(source, line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("lines") ||
            !j["lines"].is_string())
            throw ParseError(source, line_no, "expected {\"id\": string, \"lines\": string}");
        Document doc;
        doc.name = j["id"].get<std::string>();
        const std::string lines = j["lines"].get<std::string>();
        std::size_t ls = 0;
        while (ls <= lines.size()) {
            std::size_t le = lines.find('\n', ls);
            if (le == std::string::npos) le = lines.size();
            std::string_view entry(lines.data() + ls, le - ls);
            ls = le + 1;
            if (entry.empty()) continue;
            const std::size_t tab = entry.find('\t');
            std::string_view num = entry.substr(0, tab);
            int n = 0;
            auto res = std::from_chars(num.data(), num.data() + num.size(), n);
            if (res.ec != std::errc() || res.ptr != num.data() + num.size() || n < 0)
                throw ParseError(source, line_no, "bad line number '" + std::string(num) + "'");
            if (tab == std::string_view::npos) continue;
            std::string_view body = entry.substr(tab + 1);
            body = body.substr(0, body.find('\t')); // drop trailing link fields
            if (body.empty()) continue;
            if (doc.line(n) != nullptr)
                throw ParseError(source, line_no, "repeated line number " + std::to_string(n));
            doc.lines.emplace_back(n, std::string(body));
        }
        if (c.by_name_.contains(doc.name))
            throw ParseError(source, line_no, "duplicate document id '" + doc.name + "'");
        c.add(std::move(doc));
    }
    return c;
}

Corpus Corpus::load_jsonl(const std::filesystem::path& path) {
    return parse_jsonl(read_file(path), path.string());
}

std::string Corpus::to_jsonl() const {
    std::string out;
    for (const Document& d : docs_) {
        std::string lines;
        for (std::size_t i = 0; i < d.lines.size(); ++i) {
            if (i) lines += '\n';
            lines += std::to_string(d.lines[i].first) + "\t" + d.lines[i].second;
        }
        nlohmann::ordered_json j;
        j["id"] = d.name;
        j["lines"] = lines;
        out += j.dump() + "\n";
    }
    return out;
}

const Document* Corpus::find(std::string_view name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : &docs_[it->second];
}

const std::string* Corpus::text(const SentenceId& id) const {
    const Document* d = find(id.doc);
    return d ? d->line(id.line) : nullptr;
}

const std::vector<std::size_t>* Corpus::docs_with_title_token(const std::string& token) const {
    auto it = title_index_.find(token);
    return it == title_index_.end() ? nullptr : &it->second;
}

std::vector<const Document*> retrieve_documents(std::string_view claim, const Corpus& corpus,
                                                std::size_t k) {
    std::vector<std::string> queries;
    for (std::string& t : tokenize(claim))
        if (!is_stopword(t) && std::find(queries.begin(), queries.end(), t) == queries.end())
            queries.push_back(std::move(t));
    const std::set<std::string> claim_set(queries.begin(), queries.end());

    struct Ranked {
        std::size_t overlap;
        std::size_t length;
        std::size_t index;
    };
    auto rank_of = [&](std::size_t idx) {
        const auto& toks = corpus.title_tokens(idx);
        std::size_t overlap = 0;
        for (const std::string& t : toks)
            if (claim_set.contains(t)) ++overlap;
        return Ranked{overlap, toks.size(), idx};
    };
    auto better = [&](const Ranked& a, const Ranked& b) {
        if (a.overlap != b.overlap) return a.overlap > b.overlap;
        if (a.length != b.length) return a.length < b.length;
        return corpus.documents()[a.index].name < corpus.documents()[b.index].name;
    };

    std::set<std::size_t> chosen;
    for (const std::string& q : queries) {
        const auto* docs = corpus.docs_with_title_token(q);
        if (!docs) continue;
        std::vector<Ranked> cand;
        cand.reserve(docs->size());
        for (std::size_t idx : *docs) cand.push_back(rank_of(idx));
        const std::size_t take = std::min(k, cand.size());
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(),
                          better);
        for (std::size_t i = 0; i < take; ++i) chosen.insert(cand[i].index);
    }
    std::vector<Ranked> all;
    for (std::size_t idx : chosen) all.push_back(rank_of(idx));
    std::sort(all.begin(), all.end(), better);
    std::vector<const Document*> out;
    for (const Ranked& r : all) out.push_back(&corpus.documents()[r.index]);
    return out;
}

SelectorFeatures selector_features(std::string_view claim, std::string_view doc_name,
                                   std::string_view sentence) {
    const std::vector<std::string> ct = tokenize(claim);
    const std::vector<std::string> st = tokenize(sentence);
    const std::set<std::string> sent_set(st.begin(), st.end());
    const std::set<std::string> claim_set(ct.begin(), ct.end());

    std::set<std::string> claim_content;
    for (const std::string& t : ct)
        if (!is_stopword(t)) claim_content.insert(t);
    std::size_t uni_hit = 0;
    for (const std::string& t : claim_content)
        if (sent_set.contains(t)) ++uni_hit;

    auto bigrams = [](const std::vector<std::string>& toks) {
        std::set<std::pair<std::string, std::string>> out;
        for (std::size_t i = 0; i + 1 < toks.size(); ++i) out.emplace(toks[i], toks[i + 1]);
        return out;
    };
    const auto cb = bigrams(ct);
    const auto sb = bigrams(st);
    std::size_t bi_hit = 0;
    for (const auto& b : cb)
        if (sb.contains(b)) ++bi_hit;

    bool title_in_claim = false;
    for (const std::string& t : tokenize(doc_name)) {
        if (is_stopword(t)) continue;
        if (!claim_set.contains(t)) {
            title_in_claim = false;
            break;
        }
        title_in_claim = true;
    }

    const double lc = static_cast<double>(ct.size());
    const double ls = static_cast<double>(st.size());
    SelectorFeatures f{};
    f[0] = claim_content.empty() ? 0.0 : static_cast<double>(uni_hit) / static_cast<double>(claim_content.size());
    f[1] = cb.empty() ? 0.0 : static_cast<double>(bi_hit) / static_cast<double>(cb.size());
    f[2] = title_in_claim ? 1.0 : 0.0;
    f[3] = (lc == 0.0 || ls == 0.0) ? 0.0 : std::min(lc, ls) / std::max(lc, ls);
    return f;
}

double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double linear_score(const SelectorParams& p, const SelectorFeatures& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < kNumSelectorFeatures; ++i) s += p.weights[i] * f[i];
    return s;
}

double score_sentence(const SelectorParams& p, std::string_view claim, std::string_view doc_name,
                      std::string_view sentence) {
    return logistic(linear_score(p, selector_features(claim, doc_name, sentence)));
}

double SelectorEnsemble::score(const SelectorFeatures& f) const {
    if (replicas.empty()) throw ContractError("selector ensemble has no replicas");
    double s = 0.0;
    for (const SelectorParams& p : replicas) s += logistic(linear_score(p, f));
    return s / static_cast<double>(replicas.size());
}

double SelectorEnsemble::score(std::string_view claim, std::string_view doc_name,
                               std::string_view sentence) const {
    return score(selector_features(claim, doc_name, sentence));
}

std::vector<SelectorPair> build_selector_pairs(const DatasetSplit& split, const Corpus& corpus,
                                               const SelectorTrainConfig& cfg,
                                               std::size_t docs_per_query) {
    Rng rng(derive_seed(cfg.seed, 0x5e1ec7ULL));
    std::vector<SelectorPair> pairs;
    for (const LabeledExample& ex : split.examples) {
        if (ex.label == Label::Nei) continue;
        std::set<SentenceId> gold;
        for (const EvidenceGroup& g : ex.gold_groups) gold.insert(g.sentences.begin(), g.sentences.end());
        struct Neg {
            const Document* doc;
            const std::string* text;
        };
        std::vector<Neg> negatives;
        for (const Document* d : retrieve_documents(ex.claim, corpus, docs_per_query))
            for (const auto& [n, t] : d->lines)
                if (!gold.contains(SentenceId{d->name, n})) negatives.push_back({d, &t});
        for (const SentenceId& g : gold) {
            const std::string* text = corpus.text(g);
            if (!text) continue;
            const SelectorFeatures pos = selector_features(ex.claim, g.doc, *text);
            if (negatives.empty()) continue;
            for (std::size_t r = 0; r < cfg.negatives_per_positive; ++r) {
                const Neg& n = negatives[rng.below(negatives.size())];
                pairs.push_back({pos, selector_features(ex.claim, n.doc->name, *n.text)});
            }
        }
    }
    return pairs;
}

double total_hinge_loss(const SelectorParams& p, std::span<const SelectorPair> pairs) {
    double total = 0.0;
    for (const SelectorPair& pr : pairs)
        total += pair_hinge(linear_score(p, pr.positive), linear_score(p, pr.negative));
    return total;
}

SelectorParams train_selector_replica(std::span<const SelectorPair> pairs, double learning_rate,
                                      std::size_t epochs, std::uint64_t seed) {
    Rng rng(seed);
    SelectorParams p;
    for (double& w : p.weights) w = rng.uniform(-0.1, 0.1);
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t e = 0; e < epochs; ++e) {
        rng.shuffle(order);
        for (std::size_t i : order) {
            const SelectorPair& pr = pairs[i];
            if (pair_hinge(linear_score(p, pr.positive), linear_score(p, pr.negative)) <= 0.0) continue;
            for (std::size_t k = 0; k < kNumSelectorFeatures; ++k)
                p.weights[k] += learning_rate * (pr.positive[k] - pr.negative[k]);
        }
    }
    return p;
}

SelectorEnsemble train_selector(std::span<const SelectorPair> pairs, const SelectorTrainConfig& cfg) {
    if (pairs.empty()) throw ValidationError("train_selector: no training pairs");
    if (cfg.ensemble_size < 1) throw ConfigError("selector ensemble size must be >= 1");
    SelectorEnsemble ens;
    for (std::size_t r = 0; r < cfg.ensemble_size; ++r)
        ens.replicas.push_back(
            train_selector_replica(pairs, cfg.learning_rate, cfg.epochs, derive_seed(cfg.seed, r)));
    return ens;
}

std::vector<EvidenceSentence> score_candidates(const SelectorEnsemble& selector,
                                               std::string_view claim,
                                               std::span<const Document* const> docs) {
    std::vector<EvidenceSentence> out;
    for (const Document* d : docs)
        for (const auto& [n, t] : d->lines)
            out.push_back({d->name, n, t, selector.score(claim, d->name, t)});
    return out;
}

bool evidence_rank_less(const EvidenceSentence& a, const EvidenceSentence& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.doc_name != b.doc_name) return a.doc_name < b.doc_name;
    return a.line_num < b.line_num;
}

std::vector<EvidenceSentence> select_evidence(std::span<const EvidenceSentence> scored, double tau) {
    if (!(tau >= 0.0)) throw ContractError("select_evidence: tau must be >= 0");
    std::vector<EvidenceSentence> ranked(scored.begin(), scored.end());
    std::sort(ranked.begin(), ranked.end(), evidence_rank_less);
    if (ranked.size() > kMaxEvidence) ranked.resize(kMaxEvidence);
    std::vector<EvidenceSentence> kept;
    for (const EvidenceSentence& s : ranked)
        if (s.score >= tau) kept.push_back(s);
    if (kept.empty() && !ranked.empty()) kept.push_back(ranked.front());
    return kept;
}

} // namespace gear
