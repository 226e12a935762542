#include "gear/pipeline.hpp"

#include <cstdio>
#include <sstream>

#include "gear/error.hpp"
#include "gear/io.hpp"

namespace gear {

void PipelineOptions::validate() const {
    if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
    if (docs_per_query < 1) throw ConfigError("docs_per_query must be >= 1");
    model.validate();
    train_config.validate();
    if (selector.epochs < 1 || selector.ensemble_size < 1 || selector.negatives_per_positive < 1)
        throw ConfigError("selector epochs, ensemble_size and negatives_per_positive must be >= 1");
    if (!(selector.learning_rate > 0.0)) throw ConfigError("selector learning_rate must be > 0");
    if (model.encoder.kind == EncoderKind::Precomputed && !features)
        throw ConfigError("encoder_kind=precomputed needs a features file");
    for (std::size_t i = 0; i < seeds.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (seeds[i] == seeds[j]) throw ConfigError("duplicate seed " + std::to_string(seeds[i]));
}

std::vector<TauSweepRow> sweep_tau(const DatasetSplit& split,
                                   std::span<const std::vector<EvidenceSentence>> candidates,
                                   std::span<const double> taus) {
    std::vector<TauSweepRow> rows;
    for (double tau : taus) {
        const DatasetSplit sel = with_selected_evidence(split, candidates, tau);
        std::vector<Prediction> preds;
        std::size_t total = 0;
        for (const LabeledExample& ex : sel.examples) {
            Prediction p{ex.id, ex.label, {}};
            for (const EvidenceSentence& s : ex.retrieved) p.evidence.push_back(s.id());
            total += p.evidence.size();
            preds.push_back(std::move(p));
        }
        const EvidencePrf prf = evidence_prf(sel.examples, preds);
        TauSweepRow r;
        r.tau = tau;
        r.ofever = ofever_score(sel.examples, preds);
        r.precision = prf.precision;
        r.recall = prf.recall;
        r.f1 = prf.f1;
        r.mean_evidence = sel.examples.empty() ? 0.0 : static_cast<double>(total) / sel.examples.size();
        rows.push_back(r);
    }
    return rows;
}

std::string attention_csv(const GearConfig& model, GearParams& params, const LabeledExample& ex,
                          const PrecomputedFeatures* precomputed) {
    if (ex.retrieved.empty()) throw ValidationError("attention export: '" + ex.id + "' has no evidence");
    const VerifierOutput out = predict(model, params, verifier_input(ex), precomputed);
    std::string csv;
    char buf[32];
    auto row = [&](auto&& value, std::size_t n) {
        for (std::size_t j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", value(j));
            if (j) csv += ',';
            csv += buf;
        }
        csv += '\n';
    };
    for (const Matrix& a : out.layer_attention)
        for (std::size_t i = 0; i < a.rows(); ++i) row([&](std::size_t j) { return a(i, j); }, a.cols());
    if (out.aggregator_attention) {
        const std::vector<double>& b = *out.aggregator_attention;
        row([&](std::size_t j) { return b[j]; }, b.size());
    }
    return csv;
}

namespace {

DatasetSplit load_split(const std::filesystem::path& path, const Corpus& corpus, const std::string& name) {
    DatasetSplit s = load_fever_jsonl(path, corpus, name);
    if (s.examples.empty()) throw ValidationError(path.string() + ": no examples");
    return s;
}

} // namespace

PipelineResult run_pipeline(const PipelineOptions& options) {
    options.validate();
    PipelineResult res;
    const Corpus corpus = Corpus::load_jsonl(options.corpus);
    if (corpus.empty()) throw ValidationError(options.corpus.string() + ": empty corpus");
    DatasetSplit train = load_split(options.train, corpus, "train");
    DatasetSplit dev = load_split(options.dev, corpus, "dev");

    std::vector<std::vector<EvidenceSentence>> dev_candidates;
    if (options.evidence) {
        const std::string text = read_file(*options.evidence);
        train = apply_evidence_jsonl(train, text, corpus, options.evidence->string());
        dev = apply_evidence_jsonl(dev, text, corpus, options.evidence->string());
        if (options.tau_sweep)
            throw ConfigError("the tau sweep needs retrieval; drop the evidence file");
    } else {
        const std::vector<SelectorPair> pairs =
            build_selector_pairs(train, corpus, options.selector, options.docs_per_query);
        if (pairs.empty()) throw ValidationError("no selector training pairs: train has no resolved gold evidence");
        const SelectorEnsemble selector = train_selector(pairs, options.selector);
        const auto train_candidates = score_split(train, corpus, selector, options.docs_per_query);
        dev_candidates = score_split(dev, corpus, selector, options.docs_per_query);
        train = with_selected_evidence(train, train_candidates, options.tau);
        dev = with_selected_evidence(dev, dev_candidates, options.tau);
        if (options.tau_sweep) res.tau_sweep = sweep_tau(dev, dev_candidates, kTauSweep);
    }
    train.validate();
    dev.validate();

    std::optional<PrecomputedFeatures> features;
    if (options.features && !options.load_checkpoint && options.model.encoder.kind == EncoderKind::Precomputed)
        features = PrecomputedFeatures::load(*options.features, options.model.encoder.feature_dim);

    if (options.load_checkpoint) {
        res.checkpoint = load_checkpoint(*options.load_checkpoint);
        if (res.checkpoint.model.encoder.kind == EncoderKind::Precomputed) {
            if (!options.features) throw ConfigError("checkpoint uses precomputed features; pass a features file");
            features = PrecomputedFeatures::load(*options.features, res.checkpoint.model.encoder.feature_dim);
        }
        const PrecomputedFeatures* pf = features ? &*features : nullptr;
        res.predictions = predict_split(res.checkpoint.model, res.checkpoint.params, dev, pf);
        SeedRun run;
        run.seed = res.checkpoint.train.seed;
        run.epochs = res.checkpoint.history.epochs.size();
        run.best_epoch = res.checkpoint.history.best_epoch;
        run.dev_label_accuracy = label_accuracy(dev.examples, res.predictions);
        run.dev_fever_score = fever_score(dev.examples, res.predictions);
        res.runs.push_back(run);
    } else {
        const PrecomputedFeatures* pf = features ? &*features : nullptr;
        std::vector<std::uint64_t> seeds = options.seeds;
        if (seeds.empty()) seeds.push_back(options.train_config.seed);
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            TrainConfig tc = options.train_config;
            tc.seed = seeds[i];
            FitResult fr = fit(options.model, tc, train, dev, pf);
            SeedRun run;
            run.seed = seeds[i];
            run.epochs = fr.history.epochs.size();
            run.best_epoch = fr.history.best_epoch;
            run.dev_label_accuracy = fr.history.best_dev_label_accuracy;
            run.dev_fever_score = fr.history.best_dev_fever_score;
            res.runs.push_back(run);
            // Model selection across runs is by dev FEVER score.
            if (i == 0 || run.dev_fever_score > res.runs[res.selected_run].dev_fever_score) {
                res.selected_run = i;
                res.checkpoint = {options.model, tc, std::move(fr.params), std::move(fr.history)};
            }
        }
        res.predictions = predict_split(options.model, res.checkpoint.params, dev, pf);
    }
    res.report = evaluate(dev.examples, res.predictions);

    if (options.export_attention) {
        const LabeledExample* target = &dev.examples.front();
        if (!options.export_id.empty()) {
            target = nullptr;
            for (const LabeledExample& ex : dev.examples)
                if (ex.id == options.export_id) target = &ex;
            if (!target) throw ValidationError("attention export: no dev example '" + options.export_id + "'");
        }
        res.attention_csv = attention_csv(res.checkpoint.model, res.checkpoint.params, *target,
                                          features ? &*features : nullptr);
    }
    res.train = std::move(train);
    res.dev = std::move(dev);
    return res;
}

nlohmann::ordered_json to_json(const SeedRun& r) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["epochs"] = r.epochs;
    j["best_epoch"] = r.best_epoch;
    j["dev_label_accuracy"] = r.dev_label_accuracy;
    j["dev_fever_score"] = r.dev_fever_score;
    return j;
}

nlohmann::ordered_json to_json(const TauSweepRow& r) {
    nlohmann::ordered_json j;
    j["tau"] = r.tau;
    j["ofever"] = r.ofever;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["mean_evidence"] = r.mean_evidence;
    return j;
}

std::string tau_sweep_table(std::span<const TauSweepRow> rows) {
    std::ostringstream out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-8s %8s %8s %8s %8s %6s\n", "tau", "OFEVER", "P", "R", "F1", "N");
    out << buf;
    for (const TauSweepRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%-8g %7.2f%% %7.2f%% %7.2f%% %7.2f%% %6.2f\n", r.tau,
                      100 * r.ofever, 100 * r.precision, 100 * r.recall, 100 * r.f1, r.mean_evidence);
        out << buf;
    }
    return out.str();
}

} // namespace gear
