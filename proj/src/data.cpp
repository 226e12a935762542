#include "gear/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "json.hpp"

#include "gear/error.hpp"
#include "gear/io.hpp"
#include "gear/text.hpp"

namespace gear {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
        start = end + 1;
    }
    return out;
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t") == std::string_view::npos; }

std::string id_string(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw std::invalid_argument("id must be a string or an integer");
}

bool integer_like(const std::string& s) {
    if (s.empty() || s.size() > 18) return false;
    if (s.size() > 1 && s[0] == '0') return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

ordered_json id_json(const std::string& id) {
    if (integer_like(id)) return std::stoll(id);
    return id;
}

} // namespace

DatasetSplit parse_fever_jsonl(std::string_view text, const Corpus& corpus,
                               const std::string& split_name, const std::string& source) {
    DatasetSplit split;
    split.name = split_name;
    std::set<std::string> seen;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (blank(lines[i])) continue;
        json j;
        try {
            j = json::parse(lines[i]);
        } catch (const json::parse_error& e) {
            throw ParseError(source, line_no, std::string("invalid JSON: ") + e.what());
        }
        LabeledExample ex;
        try {
            ex.id = id_string(j.at("id"));
            ex.claim = j.at("claim").get<std::string>();
            ex.label = parse_label(j.at("label").get<std::string>());
            if (ex.label != Label::Nei) {
                for (const json& group : j.at("evidence")) {
                    EvidenceGroup g;
                    for (const json& item : group) {
                        if (!item.is_array() || item.size() < 4 || !item[2].is_string() ||
                            !item[3].is_number_integer())
                            throw std::invalid_argument("evidence items are [ann, ev, doc, line]");
                        SentenceId sid{item[2].get<std::string>(), item[3].get<int>()};
                        const std::string* t = corpus.text(sid);
                        g.texts.push_back(t ? *t : std::string());
                        g.resolved.push_back(t != nullptr);
                        g.sentences.push_back(std::move(sid));
                    }
                    if (!g.sentences.empty() &&
                        std::find(ex.gold_groups.begin(), ex.gold_groups.end(), g) == ex.gold_groups.end())
                        ex.gold_groups.push_back(std::move(g));
                }
                if (ex.gold_groups.empty())
                    throw std::invalid_argument("verifiable claim without evidence");
            }
        } catch (const ValidationError&) {
            throw ParseError(source, line_no, "unknown label");
        } catch (const json::exception& e) {
            throw ParseError(source, line_no, std::string("bad record: ") + e.what());
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, line_no, std::string("bad record: ") + e.what());
        }
        if (!seen.insert(ex.id).second)
            throw ValidationError(source + ":" + std::to_string(line_no) + ": duplicate id '" +
                                  ex.id + "'");
        split.examples.push_back(std::move(ex));
    }
    return split;
}

DatasetSplit load_fever_jsonl(const std::filesystem::path& path, const Corpus& corpus,
                              const std::string& split_name) {
    return parse_fever_jsonl(read_file(path), corpus, split_name, path.string());
}

std::string to_fever_jsonl(const DatasetSplit& split) {
    std::string out;
    for (const LabeledExample& ex : split.examples) {
        ordered_json j;
        j["id"] = id_json(ex.id);
        j["claim"] = ex.claim;
        j["label"] = std::string(fever_label_name(ex.label));
        ordered_json ev = ordered_json::array();
        if (ex.label == Label::Nei) {
            ev.push_back(ordered_json::array({ordered_json::array({nullptr, nullptr, nullptr, nullptr})}));
        } else {
            for (const EvidenceGroup& g : ex.gold_groups) {
                ordered_json group = ordered_json::array();
                for (const SentenceId& s : g.sentences)
                    group.push_back(ordered_json::array({nullptr, nullptr, s.doc, s.line}));
                ev.push_back(std::move(group));
            }
        }
        j["evidence"] = std::move(ev);
        out += j.dump() + "\n";
    }
    return out;
}

std::string to_prediction_jsonl(std::span<const Prediction> predictions) {
    std::string out;
    for (const Prediction& p : predictions) {
        ordered_json j;
        j["id"] = id_json(p.id);
        j["predicted_label"] = std::string(fever_label_name(p.label));
        ordered_json ev = ordered_json::array();
        for (const SentenceId& s : p.evidence) ev.push_back(ordered_json::array({s.doc, s.line}));
        j["predicted_evidence"] = std::move(ev);
        out += j.dump() + "\n";
    }
    return out;
}

std::vector<Prediction> parse_prediction_jsonl(std::string_view text, const std::string& source) {
    std::vector<Prediction> out;
    std::set<std::string> seen;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (blank(lines[i])) continue;
        Prediction p;
        try {
            const json j = json::parse(lines[i]);
            p.id = id_string(j.at("id"));
            p.label = parse_label(j.at("predicted_label").get<std::string>());
            for (const json& e : j.at("predicted_evidence")) {
                if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_number_integer())
                    throw std::invalid_argument("evidence entries are [doc, line]");
                p.evidence.push_back({e[0].get<std::string>(), e[1].get<int>()});
            }
        } catch (const json::parse_error& e) {
            throw ParseError(source, line_no, std::string("invalid JSON: ") + e.what());
        } catch (const json::exception& e) {
            throw ParseError(source, line_no, std::string("bad prediction: ") + e.what());
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, line_no, std::string("bad prediction: ") + e.what());
        } catch (const ValidationError&) {
            throw ParseError(source, line_no, "unknown predicted_label");
        }
        if (!seen.insert(p.id).second)
            throw ValidationError(source + ":" + std::to_string(line_no) +
                                  ": duplicate prediction id '" + p.id + "'");
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Prediction> load_prediction_jsonl(const std::filesystem::path& path) {
    return parse_prediction_jsonl(read_file(path), path.string());
}

std::string to_evidence_jsonl(const DatasetSplit& split) {
    std::string out;
    for (const LabeledExample& ex : split.examples) {
        ordered_json j;
        j["id"] = id_json(ex.id);
        ordered_json ev = ordered_json::array();
        for (const EvidenceSentence& s : ex.retrieved)
            ev.push_back(ordered_json::array({s.doc_name, s.line_num, s.score}));
        j["evidence"] = std::move(ev);
        out += j.dump() + "\n";
    }
    return out;
}

DatasetSplit apply_evidence_jsonl(const DatasetSplit& split, std::string_view text,
                                  const Corpus& corpus, const std::string& source) {
    std::map<std::string, std::vector<EvidenceSentence>> records;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (blank(lines[i])) continue;
        std::string id;
        std::vector<EvidenceSentence> ev;
        try {
            const json j = json::parse(lines[i]);
            id = id_string(j.at("id"));
            for (const json& e : j.at("evidence")) {
                if (!e.is_array() || e.size() != 3 || !e[0].is_string() || !e[1].is_number_integer() ||
                    !e[2].is_number())
                    throw std::invalid_argument("evidence entries are [doc, line, score]");
                EvidenceSentence s{e[0].get<std::string>(), e[1].get<int>(), {}, e[2].get<double>()};
                const std::string* t = corpus.text(s.id());
                if (!t)
                    throw ValidationError(source + ":" + std::to_string(line_no) + ": sentence (" +
                                          s.doc_name + ", " + std::to_string(s.line_num) +
                                          ") is not in the corpus");
                s.text = *t;
                ev.push_back(std::move(s));
            }
        } catch (const json::parse_error& e) {
            throw ParseError(source, line_no, std::string("invalid JSON: ") + e.what());
        } catch (const json::exception& e) {
            throw ParseError(source, line_no, std::string("bad evidence record: ") + e.what());
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, line_no, std::string("bad evidence record: ") + e.what());
        }
        if (ev.size() > kMaxEvidence)
            throw ValidationError(source + ":" + std::to_string(line_no) + ": more than 5 sentences for '" +
                                  id + "'");
        if (!records.emplace(id, std::move(ev)).second)
            throw ValidationError(source + ":" + std::to_string(line_no) + ": duplicate id '" + id + "'");
    }
    DatasetSplit out = split;
    for (LabeledExample& ex : out.examples) {
        auto it = records.find(ex.id);
        if (it == records.end())
            throw ValidationError(source + ": no evidence record for '" + ex.id + "'");
        ex.retrieved = it->second;
    }
    return out;
}

// ---- synthetic ----

namespace {

constexpr std::array<std::string_view, 16> kNames{
    "alice", "bruno", "carla", "dmitri", "elena", "farid", "greta", "hugo",
    "ingrid", "jonas", "kira", "lorenzo", "maya", "nils", "olga", "pablo"};
// Documented cities carry one climate each; kNeiCity never gets a climate line.
constexpr std::array<std::string_view, 2> kCities{"paris", "rome"};
constexpr std::string_view kNeiCity = "lima";
constexpr std::array<std::string_view, 24> kSyllables{
    "zor", "vek", "tal", "mun", "dar", "kel", "fim", "bos", "rag", "lup", "sen", "tem",
    "dru", "pil", "gow", "yat", "nak", "qet", "sor", "bim", "wex", "ulo", "jad", "cov"};
// Regions are 3-syllable sets, so C(24, 3) of them.
constexpr std::size_t kMaxRegions = 2024;
constexpr std::array<std::string_view, 2> kClimates{"cold", "warm"};
// Each region also gets one landmark doc per entry, so together with its
// climate and resident docs it fills the top-7 of every syllable query.
constexpr std::array<std::string_view, 5> kLandmarks{"rivers", "bridges", "markets", "hills",
                                                     "gardens"};
constexpr std::array<std::string_view, 8> kSemantic{"lives", "in", "a", "city", "with",
                                                    "climate", "has", "of"};

std::string capitalized(std::string_view w) {
    std::string s(w);
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

std::string claim_text(std::string_view name, const std::string& region, std::string_view climate) {
    return capitalized(name) + " of " + region + " lives in a city with a " + std::string(climate) +
           " climate.";
}

std::string resident_text(std::string_view name, std::string_view city) {
    return capitalized(name) + " lives in " + capitalized(city) + ".";
}

std::string climate_text(std::string_view city, std::string_view climate) {
    return capitalized(city) + " has a " + std::string(climate) + " climate.";
}

std::vector<Label> label_quota(std::size_t n, double nei_fraction, Rng& rng) {
    const auto n_nei = static_cast<std::size_t>(std::llround(nei_fraction * static_cast<double>(n)));
    std::vector<Label> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n_nei; ++i) labels.push_back(Label::Nei);
    for (std::size_t i = n_nei; i < n; ++i)
        labels.push_back((i - n_nei) % 2 == 0 ? Label::Supported : Label::Refuted);
    rng.shuffle(labels);
    return labels;
}

class WorldBuilder {
public:
    WorldBuilder(const SyntheticConfig& cfg, Corpus& corpus, Rng& rng)
        : cfg_(cfg), corpus_(corpus), rng_(rng) {}

    void fill(DatasetSplit& split, std::size_t count) {
        const std::vector<Label> labels = label_quota(count, cfg_.nei_fraction, rng_);
        std::size_t next = 0;
        while (next < count) {
            const std::size_t take = std::min(cfg_.facts_per_world, count - next);
            world(split, std::span(labels).subspan(next, take));
            next += take;
        }
    }

private:
    std::string fresh_region() {
        if (used_.size() >= kMaxRegions) throw ConfigError("synthetic generator ran out of region names");
        for (;;) {
            std::vector<std::size_t> v(kSyllables.size());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
            rng_.shuffle(v);
            // Keyed by the syllable set: a permuted region would share every title token.
            std::array<std::size_t, 3> key{v[0], v[1], v[2]};
            std::sort(key.begin(), key.end());
            if (!used_.insert(key).second) continue;
            return capitalized(kSyllables[v[0]]) + " " + capitalized(kSyllables[v[1]]) + " " +
                   capitalized(kSyllables[v[2]]);
        }
    }

    void world(DatasetSplit& split, std::span<const Label> labels) {
        const std::string region = fresh_region();
        // Cold/warm assignment of the two documented cities.
        const std::size_t cold = rng_.below(2);
        auto climate_of = [&](std::size_t c) { return kClimates[c == cold ? 0 : 1]; };
        // Easy worlds document a single city, so one hop settles the claim.
        const bool easy = rng_.uniform() < cfg_.easy_fraction;
        const std::size_t easy_city = rng_.below(2);

        Document climate_doc{region, {}};
        for (std::size_t c = 0; c < kCities.size(); ++c)
            if (!easy || c == easy_city)
                climate_doc.lines.emplace_back(static_cast<int>(climate_doc.lines.size()),
                                               climate_text(kCities[c], climate_of(c)));
        for (std::string_view l : kLandmarks) {
            Document d{region + " " + capitalized(l), {}};
            d.lines.emplace_back(0, "The " + std::string(l) + " are famous.");
            corpus_.add(std::move(d));
        }
        const std::string climate_name = climate_doc.name;
        corpus_.add(std::move(climate_doc));
        const Document& doc = *corpus_.find(climate_name);

        // Names stay out of titles: a name query would pull other regions' residents.
        Document residents{region + " residents", {}};
        std::vector<std::string_view> names(kNames.begin(), kNames.end());
        rng_.shuffle(names);
        if (labels.size() > names.size()) throw ConfigError("facts_per_world exceeds the name pool (16)");
        for (std::size_t p = 0; p < labels.size(); ++p) {
            const std::string_view name = names[p];
            const Label label = labels[p];
            std::string_view city = kNeiCity;
            std::string_view claimed = kClimates[rng_.below(2)];
            int line = -1;
            if (label != Label::Nei) {
                const std::size_t c = easy ? easy_city : rng_.below(2);
                city = kCities[c];
                line = easy ? 0 : static_cast<int>(c);
                const bool truth_cold = climate_of(c) == kClimates[0];
                claimed = (label == Label::Supported) == truth_cold ? kClimates[0] : kClimates[1];
            }
            const int rline = static_cast<int>(residents.lines.size());
            residents.lines.emplace_back(rline, resident_text(name, city));
            LabeledExample ex;
            ex.id = split.name + "-" + std::to_string(split.examples.size());
            ex.claim = claim_text(name, region, claimed);
            ex.label = label;
            if (label != Label::Nei) {
                EvidenceGroup g;
                g.sentences = {{residents.name, rline}, {climate_name, line}};
                g.texts = {residents.lines.back().second, *corpus_.text(g.sentences[1])};
                g.resolved = {true, true};
                ex.gold_groups.push_back(std::move(g));
            }
            self_check(ex, residents.lines.back().second, doc);
            split.examples.push_back(std::move(ex));
        }
        corpus_.add(std::move(residents));
    }

    static void self_check(const LabeledExample& ex, const std::string& resident_line,
                           const Document& climate_doc) {
        std::vector<std::string> all{resident_line};
        for (const auto& [n, t] : climate_doc.lines) all.push_back(t);
        const auto full = synthetic_rule_label(ex.claim, all);
        const Label got = full.value_or(Label::Nei);
        if (got != ex.label) throw ContractError("synthetic self-check failed for " + ex.id);
        for (const EvidenceGroup& g : ex.gold_groups) {
            if (synthetic_rule_label(ex.claim, g.texts) != ex.label)
                throw ContractError("synthetic gold group does not prove " + ex.id);
            for (std::size_t drop = 0; drop < g.texts.size(); ++drop) {
                std::vector<std::string> rest;
                for (std::size_t k = 0; k < g.texts.size(); ++k)
                    if (k != drop) rest.push_back(g.texts[k]);
                if (synthetic_rule_label(ex.claim, rest).has_value())
                    throw ContractError("synthetic gold group of " + ex.id + " is not minimal");
            }
        }
    }

    const SyntheticConfig& cfg_;
    Corpus& corpus_;
    Rng& rng_;
    std::set<std::array<std::size_t, 3>> used_;
};

} // namespace

void SyntheticConfig::validate() const {
    if (num_examples < 1) throw ConfigError("synthetic num_examples must be >= 1");
    if (facts_per_world < 1 || facts_per_world > kNames.size())
        throw ConfigError("synthetic facts_per_world must be in 1..16");
    if (!(nei_fraction >= 0.0 && nei_fraction <= 1.0))
        throw ConfigError("synthetic nei_fraction must be in [0, 1]");
    if (!(easy_fraction >= 0.0 && easy_fraction <= 1.0))
        throw ConfigError("synthetic easy_fraction must be in [0, 1]");
    const std::size_t worlds = (num_examples + facts_per_world - 1) / facts_per_world +
                               (dev_examples + facts_per_world - 1) / facts_per_world;
    if (worlds > kMaxRegions)
        throw ConfigError("synthetic dataset needs more than " + std::to_string(kMaxRegions) + " regions");
}

SyntheticData generate_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    SyntheticData out;
    out.train.name = "train";
    out.dev.name = "dev";
    Rng rng(derive_seed(cfg.seed, 0x5717ULL));
    WorldBuilder builder(cfg, out.corpus, rng);
    builder.fill(out.train, cfg.num_examples);
    if (cfg.dev_examples > 0) builder.fill(out.dev, cfg.dev_examples);
    return out;
}

std::optional<Label> synthetic_rule_label(std::string_view claim,
                                          std::span<const std::string> sentences) {
    const std::vector<std::string> ct = tokenize(claim);
    if (ct.size() < 3 || ct.back() != "climate") return std::nullopt;
    const std::string& name = ct.front();
    const std::string& claimed = ct[ct.size() - 2];
    std::map<std::string, std::string> home, climate;
    for (const std::string& s : sentences) {
        const std::vector<std::string> t = tokenize(s);
        if (t.size() == 4 && t[1] == "lives" && t[2] == "in") home[t[0]] = t[3];
        else if (t.size() == 5 && t[1] == "has" && t[2] == "a" && t[4] == "climate") climate[t[0]] = t[3];
    }
    auto h = home.find(name);
    if (h == home.end()) return std::nullopt;
    auto c = climate.find(h->second);
    if (c == climate.end()) return std::nullopt;
    return c->second == claimed ? Label::Supported : Label::Refuted;
}

std::vector<std::string_view> synthetic_city_words() {
    std::vector<std::string_view> out(kCities.begin(), kCities.end());
    out.push_back(kNeiCity);
    return out;
}
std::span<const std::string_view> synthetic_semantic_words() { return kSemantic; }

// ---- subsets ----

DatasetSplit build_difficult_subset(const DatasetSplit& split) {
    DatasetSplit out;
    out.name = split.name;
    for (const LabeledExample& ex : split.examples) {
        const bool keep = ex.label == Label::Nei ||
                          std::all_of(ex.gold_groups.begin(), ex.gold_groups.end(),
                                      [](const EvidenceGroup& g) { return g.sentences.size() >= 2; });
        if (keep) out.examples.push_back(ex);
    }
    return out;
}

DatasetSplit build_evidence_enhanced(const DatasetSplit& split,
                                     std::span<const std::vector<EvidenceSentence>> candidates,
                                     double tau) {
    if (candidates.size() != split.examples.size())
        throw ContractError("build_evidence_enhanced: candidate lists do not match examples");
    DatasetSplit out;
    out.name = split.name;
    for (std::size_t i = 0; i < split.examples.size(); ++i) {
        LabeledExample ex = split.examples[i];
        std::map<SentenceId, EvidenceSentence> pool;
        for (const EvidenceSentence& s : candidates[i]) {
            auto [it, inserted] = pool.emplace(s.id(), s);
            if (!inserted) it->second.score = std::max(it->second.score, s.score);
        }
        for (const EvidenceGroup& g : ex.gold_groups)
            for (std::size_t k = 0; k < g.sentences.size(); ++k) {
                if (!g.resolved[k])
                    throw ValidationError("build_evidence_enhanced: gold sentence (" +
                                          g.sentences[k].doc + ", " +
                                          std::to_string(g.sentences[k].line) + ") of '" + ex.id +
                                          "' is not in the corpus");
                auto [it, inserted] = pool.emplace(
                    g.sentences[k], EvidenceSentence{g.sentences[k].doc, g.sentences[k].line, g.texts[k], 1.0});
                if (!inserted) it->second.score = std::max(it->second.score, 1.0);
            }
        std::vector<EvidenceSentence> merged;
        merged.reserve(pool.size());
        for (auto& [id, s] : pool) merged.push_back(std::move(s));
        ex.retrieved = select_evidence(merged, tau);
        out.examples.push_back(std::move(ex));
    }
    return out;
}

std::vector<std::vector<EvidenceSentence>> score_split(const DatasetSplit& split,
                                                       const Corpus& corpus,
                                                       const SelectorEnsemble& selector,
                                                       std::size_t docs_per_query) {
    std::vector<std::vector<EvidenceSentence>> out;
    out.reserve(split.examples.size());
    for (const LabeledExample& ex : split.examples) {
        const auto docs = retrieve_documents(ex.claim, corpus, docs_per_query);
        out.push_back(score_candidates(selector, ex.claim, docs));
    }
    return out;
}

DatasetSplit with_selected_evidence(const DatasetSplit& split,
                                    std::span<const std::vector<EvidenceSentence>> candidates,
                                    double tau) {
    if (candidates.size() != split.examples.size())
        throw ContractError("with_selected_evidence: candidate lists do not match examples");
    DatasetSplit out = split;
    for (std::size_t i = 0; i < out.examples.size(); ++i)
        out.examples[i].retrieved = select_evidence(candidates[i], tau);
    return out;
}

} // namespace gear
