// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gear/cli.hpp"
#include "gear/data.hpp"
#include "gear/io.hpp"
#include "gear/kernels.hpp"
#include "gear/model_check.hpp"
#include "gear/pipeline.hpp"
#include "gear/train.hpp"
#include "oracles.hpp"

using namespace gear;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (double& x : m.values()) x = rng.uniform(-1.0, 1.0);
    return m;
}

constexpr AggregatorKind kKinds[] = {AggregatorKind::Attention, AggregatorKind::Max, AggregatorKind::Mean};

oracle::Agg to_oracle(AggregatorKind k) {
    if (k == AggregatorKind::Attention) return oracle::Agg::Attention;
    return k == AggregatorKind::Max ? oracle::Agg::Max : oracle::Agg::Mean;
}

// ---- 1 ----

Outcome gradient_fidelity() {
    const auto t0 = Clock::now();
    const ModelGradcheckReport r = run_model_gradcheck(24, 1, kGradcheckTolerance, kGradcheckStep);
    const double secs = seconds_since(t0);
    std::set<std::pair<std::size_t, int>> combos;
    bool dims_ok = true;
    for (const auto& t : r.trials) {
        combos.insert({t.config.num_layers, static_cast<int>(t.config.aggregator)});
        const std::size_t f = t.config.encoder.feature_dim, h = t.config.hidden_dim;
        dims_ok = dims_ok && (f == 4 || f == 8) && (h == 3 || h == 4) && t.num_evidence >= 1 && t.num_evidence <= 5;
    }
    const bool pass = r.passed && r.max_rel_error <= 1e-4 && r.trials.size() >= 20 && combos.size() == 12 &&
                      dims_ok && secs < 60.0;
    return {pass, fmt("%zu configs, %zu (T, aggregator) combos, max rel err %.2e (tol 1e-4), %.1f s (limit 60 s)",
                      r.trials.size(), combos.size(), r.max_rel_error, secs)};
}

// ---- 2 ----

Outcome permutation_invariance() {
    Rng rng(202);
    double worst_probs = 0, worst_att = 0;
    std::size_t triples = 0;
    for (AggregatorKind kind : kKinds) {
        for (int trial = 0; trial < 100; ++trial, ++triples) {
            GearConfig cfg;
            cfg.encoder.feature_dim = 4 + rng.below(5);
            cfg.hidden_dim = 2 + rng.below(4);
            cfg.num_layers = rng.below(4);
            cfg.aggregator = kind;
            cfg.classifier_relu = rng.below(2) == 0;
            GearParams params = init_gear_params(cfg, derive_seed(7, static_cast<std::uint64_t>(triples)));
            const std::size_t n = 2 + rng.below(4), f = cfg.encoder.feature_dim;
            const Matrix c = random_matrix(rng, f, 1);
            std::vector<Matrix> e;
            for (std::size_t i = 0; i < n; ++i) e.push_back(random_matrix(rng, f, 1));
            std::vector<std::size_t> perm(n);
            for (std::size_t i = 0; i < n; ++i) perm[i] = i;
            rng.shuffle(perm);

            auto run = [&](const std::vector<std::size_t>& order) {
                Tape t;
                const BoundGear bound = bind(t, cfg, params);
                EncodedVars enc{t.constant(c), {}};
                for (std::size_t i : order) enc.evidence.push_back(t.constant(e[i]));
                ForwardPass fp = forward_encoded(cfg, bound, enc);
                return std::pair{fp.probs.value(), fp.layer_attention};
            };
            std::vector<std::size_t> ident(n);
            for (std::size_t i = 0; i < n; ++i) ident[i] = i;
            const auto [pa, aa] = run(ident);
            const auto [pb, ab] = run(perm);
            worst_probs = std::max(worst_probs, max_abs_diff(pa, pb));
            // node i of the permuted run is node perm[i] of the original
            for (std::size_t l = 0; l < aa.size(); ++l)
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        worst_att = std::max(worst_att, std::abs(ab[l](i, j) - aa[l](perm[i], perm[j])));
        }
    }
    const bool pass = worst_probs <= 1e-9 && worst_att <= 1e-9;
    return {pass, fmt("%zu triples (100 per aggregator), max |dprobs| %.1e, max |dattention| %.1e (tol 1e-9)",
                      triples, worst_probs, worst_att)};
}

// ---- 3 ----

Outcome straight_line_oracles() {
    Rng rng(303);
    double worst_layer = 0, worst_agg = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t f = 1 + rng.below(8), h = 1 + rng.below(8), n = 1 + rng.below(6);
        ErNetLayerParams layer{Parameter("w0", random_matrix(rng, h, 2 * f)), Parameter("w1", random_matrix(rng, 1, h))};
        AggregatorParams agg;
        agg.kind = kKinds[trial % 3];
        agg.att_w0 = Parameter("a0", random_matrix(rng, h, 2 * f));
        agg.att_w1 = Parameter("a1", random_matrix(rng, 1, h));
        agg.classifier_w = Parameter("w", random_matrix(rng, 3, f));
        agg.classifier_b = Parameter("b", random_matrix(rng, 3, 1));
        const bool relu = rng.below(2) == 0;
        const Matrix c = random_matrix(rng, f, 1);
        std::vector<Matrix> hs;
        std::vector<oracle::Vec> ohs;
        for (std::size_t i = 0; i < n; ++i) {
            hs.push_back(random_matrix(rng, f, 1));
            ohs.push_back(oracle::to_vec(hs.back()));
        }

        Tape t;
        std::vector<Var> in;
        for (const Matrix& m : hs) in.push_back(t.constant(m));
        const LayerOutput out = propagate_layer(bind(t, layer), in);
        const oracle::LayerResult ref =
            oracle::ernet_layer(oracle::to_mat(layer.w0.value), oracle::to_mat(layer.w1.value), ohs);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < f; ++k)
                worst_layer = std::max(worst_layer, std::abs(out.states[i].value()[k] - ref.states[i][k]));
            for (std::size_t j = 0; j < n; ++j)
                worst_layer = std::max(worst_layer, std::abs(out.attention(i, j) - ref.attention[i][j]));
        }

        const BoundAggregator b = bind(t, agg);
        const AggregateResult r = aggregate(b, t.constant(c), in);
        const Matrix probs = classify(b, r.o, relu).value();
        const oracle::AggResult aref = oracle::aggregate(to_oracle(agg.kind), oracle::to_mat(agg.att_w0.value),
                                                         oracle::to_mat(agg.att_w1.value), oracle::to_vec(c), ohs);
        const oracle::Vec pref = oracle::classify(oracle::to_mat(agg.classifier_w.value),
                                                  oracle::to_vec(agg.classifier_b.value), aref.o, relu);
        for (std::size_t k = 0; k < f; ++k) worst_agg = std::max(worst_agg, std::abs(r.o.value()[k] - aref.o[k]));
        for (std::size_t k = 0; k < 3; ++k) worst_agg = std::max(worst_agg, std::abs(probs[k] - pref[k]));
        if (r.attention)
            for (std::size_t j = 0; j < n; ++j)
                worst_agg = std::max(worst_agg, std::abs((*r.attention)[j] - aref.attention[j]));
    }

    bool identity = true;
    for (int trial = 0; trial < 100; ++trial) {
        HiddenStates init;
        const std::size_t f = 1 + rng.below(8);
        for (std::size_t i = 0, n = 1 + rng.below(6); i < n; ++i) init.states.push_back(random_matrix(rng, f, 1));
        std::vector<ErNetLayerParams> none;
        const auto [out, att] = run_ernet(ErNetConfig{f, 4, 0, 3}, none, init);
        identity = identity && out.states == init.states && att.empty();
    }
    const bool pass = worst_layer <= 1e-12 && worst_agg <= 1e-12 && identity;
    return {pass, fmt("1000 instances, max err ERNet layer %.1e, aggregator+classifier %.1e (tol 1e-12); "
                      "T=0 identity %s on 100",
                      worst_layer, worst_agg, identity ? "exact" : "BROKEN")};
}

// ---- 4 ----

void random_micro(Rng& rng, std::vector<LabeledExample>& ex, std::vector<Prediction>& preds) {
    const std::size_t n = 1 + rng.below(8);
    auto rand_sentence = [&] { return SentenceId{"D" + std::to_string(rng.below(3)), static_cast<int>(rng.below(3))}; };
    for (std::size_t i = 0; i < n; ++i) {
        LabeledExample e;
        e.id = "e" + std::to_string(i);
        e.claim = "c";
        e.label = kAllLabels[rng.below(3)];
        if (e.label != Label::Nei) {
            for (std::size_t g = 0, ng = 1 + rng.below(3); g < ng; ++g) {
                EvidenceGroup grp;
                for (std::size_t s = 0, k = 1 + rng.below(3); s < k; ++s) {
                    const SentenceId id = rand_sentence();
                    if (std::find(grp.sentences.begin(), grp.sentences.end(), id) == grp.sentences.end())
                        grp.sentences.push_back(id);
                }
                grp.texts.assign(grp.sentences.size(), "t");
                grp.resolved.assign(grp.sentences.size(), true);
                e.gold_groups.push_back(grp);
            }
        }
        ex.push_back(e);
        Prediction p{e.id, kAllLabels[rng.below(3)], {}};
        for (std::size_t s = 0, k = rng.below(9); s < k; ++s) {
            const SentenceId id = rand_sentence();
            if (std::find(p.evidence.begin(), p.evidence.end(), id) == p.evidence.end()) p.evidence.push_back(id);
        }
        preds.push_back(p);
    }
    // predictions arrive in arbitrary order
    rng.shuffle(preds);
}

Outcome metric_oracles() {
    Rng rng(404);
    std::size_t mismatches = 0, inequality = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<LabeledExample> ex;
        std::vector<Prediction> preds;
        random_micro(rng, ex, preds);
        std::vector<Prediction> aligned;
        for (const LabeledExample& e : ex)
            for (const Prediction& p : preds)
                if (p.id == e.id) aligned.push_back(p);
        const oracle::Metrics want = oracle::metrics(ex, aligned);
        const EvidencePrf prf = evidence_prf(ex, preds);
        const double fever = fever_score(ex, preds), la = label_accuracy(ex, preds), of = ofever_score(ex, preds);
        mismatches += !(fever == want.fever && la == want.la && of == want.ofever && prf.precision == want.p &&
                        prf.recall == want.r && prf.f1 == want.f1);
        inequality += !(fever <= la && fever <= of);
    }
    return {mismatches == 0 && inequality == 0,
            fmt("1000 micro-datasets, %zu oracle mismatches (exact), %zu inequality violations", mismatches,
                inequality)};
}

// ---- shared synthetic setup for 5b, 6, 7 ----

constexpr std::uint64_t kDataSeed = 7;
constexpr std::size_t kTrainSize = 1000;
constexpr std::size_t kDevSize = 200;

struct Synthetic {
    SyntheticData data;
    std::vector<std::vector<EvidenceSentence>> train_candidates;
    std::vector<std::vector<EvidenceSentence>> dev_candidates;
    DatasetSplit train; // selected at the default tau
    DatasetSplit dev;
};

Synthetic build_synthetic() {
    Synthetic s;
    SyntheticConfig sc;
    sc.num_examples = kTrainSize;
    sc.dev_examples = kDevSize;
    sc.seed = kDataSeed;
    s.data = generate_synthetic(sc);
    const SelectorTrainConfig stc;
    const auto pairs = build_selector_pairs(s.data.train, s.data.corpus, stc);
    const SelectorEnsemble selector = train_selector(pairs, stc);
    s.train_candidates = score_split(s.data.train, s.data.corpus, selector);
    s.dev_candidates = score_split(s.data.dev, s.data.corpus, selector);
    s.train = with_selected_evidence(s.data.train, s.train_candidates, kDefaultTau);
    s.dev = with_selected_evidence(s.data.dev, s.dev_candidates, kDefaultTau);
    return s;
}

// ---- 5 ----

Outcome threshold_filter(const Synthetic& syn) {
    Rng rng(505);
    const double taus[] = {0.0, 1e-4, 1e-3, 1e-2, 1e-1};
    std::size_t bad_count = 0, bad_mono = 0, bad_top5 = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<EvidenceSentence> s;
        for (std::size_t i = 0, n = 1 + rng.below(15); i < n; ++i) {
            const double score = rng.below(2) ? rng.uniform() : std::pow(10.0, -rng.uniform(0.0, 6.0));
            s.push_back({"D" + std::to_string(rng.below(5)), static_cast<int>(i), "", score});
        }
        std::vector<EvidenceSentence> ranked = s;
        std::sort(ranked.begin(), ranked.end(), evidence_rank_less);
        ranked.resize(std::min<std::size_t>(5, ranked.size()));
        std::size_t prev = 99;
        for (double tau : taus) {
            const auto got = select_evidence(s, tau);
            bad_count += got.size() < 1 || got.size() > 5;
            bad_mono += got.size() > prev;
            prev = got.size();
            if (tau == 0.0) bad_top5 += got != ranked;
        }
    }
    const std::vector<TauSweepRow> rows = sweep_tau(syn.data.dev, syn.dev_candidates, kTauSweep);
    bool shape = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
        shape = shape && rows[i].recall <= rows[i - 1].recall && rows[i].precision >= rows[i - 1].precision;
    std::string sweep;
    for (const TauSweepRow& r : rows) sweep += fmt(" %g:P%.3f/R%.3f", r.tau, r.precision, r.recall);
    const bool pass = bad_count == 0 && bad_mono == 0 && bad_top5 == 0 && shape;
    return {pass, fmt("1000 score sets: %zu count, %zu monotonicity, %zu top-5 violations; synthetic sweep%s (%s)",
                      bad_count, bad_mono, bad_top5, sweep.c_str(), shape ? "R non-increasing, P non-decreasing" : "shape broken")};
}

// ---- 6 and 7 ----

GearConfig attention_model(std::size_t layers) {
    GearConfig g;
    g.num_layers = layers;
    g.aggregator = AggregatorKind::Attention;
    return g;
}

double fit_dev_accuracy(const GearConfig& model, std::uint64_t seed, const DatasetSplit& train,
                        const DatasetSplit& dev) {
    TrainConfig tc;
    tc.seed = seed;
    return fit(model, tc, train, dev).history.best_dev_label_accuracy;
}

constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

struct LearningRuns {
    std::vector<double> t1, t0;
};

Outcome learning_sanity(const Synthetic& syn, LearningRuns& runs) {
    const auto t0 = Clock::now();
    for (std::uint64_t s : kSeeds) {
        runs.t1.push_back(fit_dev_accuracy(attention_model(1), s, syn.train, syn.dev));
        runs.t0.push_back(fit_dev_accuracy(attention_model(0), s, syn.train, syn.dev));
    }
    const double secs = seconds_since(t0);
    bool lower = true;
    std::string per_seed;
    for (std::size_t i = 0; i < runs.t1.size(); ++i) {
        lower = lower && runs.t0[i] < runs.t1[i];
        per_seed += fmt(" s%llu %.3f/%.3f", static_cast<unsigned long long>(kSeeds[i]), runs.t1[i], runs.t0[i]);
    }
    // the headline run is the first seed, fixed before looking at results
    const bool reach = runs.t1[0] >= 0.95;
    const bool pass = reach && lower && secs < 300.0;
    return {pass, fmt("%zu train / %zu dev; T=1 seed 1 dev LA %.3f (need >= 0.95); T=1/T=0 per seed:%s (%s); %.0f s "
                      "(limit 300 s)",
                      syn.train.examples.size(), syn.dev.examples.size(), runs.t1[0], per_seed.c_str(),
                      lower ? "T=0 lower on all" : "T=0 not lower on all", secs)};
}

Outcome evidence_enhanced(const Synthetic& syn, const LearningRuns& runs) {
    const DatasetSplit train = build_evidence_enhanced(syn.data.train, syn.train_candidates, kDefaultTau);
    const DatasetSplit dev = build_evidence_enhanced(syn.data.dev, syn.dev_candidates, kDefaultTau);
    std::vector<LabeledExample> verifiable;
    std::vector<Prediction> preds;
    for (const DatasetSplit* split : {&train, &dev})
        for (const LabeledExample& ex : split->examples) {
            if (ex.label == Label::Nei) continue;
            verifiable.push_back(ex);
            Prediction p{ex.id, ex.label, {}};
            for (const EvidenceSentence& s : ex.retrieved) p.evidence.push_back(s.id());
            preds.push_back(p);
        }
    const double of = ofever_score(verifiable, preds);
    bool geq = true;
    std::string per_seed;
    for (std::size_t i = 0; i < std::size(kSeeds); ++i) {
        const double la = fit_dev_accuracy(attention_model(1), kSeeds[i], train, dev);
        geq = geq && la >= runs.t1[i];
        per_seed += fmt(" s%llu %.3f/%.3f", static_cast<unsigned long long>(kSeeds[i]), la, runs.t1[i]);
    }
    return {of == 1.0 && geq, fmt("OFEVER on %zu non-NEI claims %.4f (need 1); enhanced/plain dev LA per seed:%s (%s)",
                                  verifiable.size(), of, per_seed.c_str(), geq ? "enhanced >= plain on all" : "enhanced lower on some")};
}

// ---- 8 ----

Outcome determinism(const fs::path& work) {
    fs::remove_all(work);
    std::ostringstream sink;
    ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    const fs::path data = work / "data";
    int code = cli::run({"synth", "--out", data.string(), "--train-size", "300", "--dev-size", "100", "--seed", "11"},
                        sink, sink);
    if (code != 0) return {false, "synth failed: " + sink.str()};
    auto pipeline = [&](const fs::path& out) {
        return cli::run({"pipeline", "--corpus", (data / "corpus.jsonl").string(), "--train",
                         (data / "train.jsonl").string(), "--dev", (data / "dev.jsonl").string(), "--out", out.string(),
                         "--max-epochs", "30", "--seeds", "1,2", "--tau-sweep", "--export-attention",
                         (out / "attention.csv").string()},
                        sink, sink);
    };
    // same output directory both times, so the manifests can match byte for byte
    const fs::path out = work / "run", first = work / "first";
    if (pipeline(out) != 0) return {false, "pipeline failed: " + sink.str()};
    fs::copy(out, first, fs::copy_options::recursive);
    if (pipeline(out) != 0) return {false, "pipeline failed: " + sink.str()};
    std::size_t same = 0, differ = 0;
    std::string which;
    for (const char* f : {"predictions.jsonl", "report.json", "report.txt", "checkpoint.json", "runs.json",
                          "evidence.jsonl", "tau_sweep.json", "attention.csv", "manifest.json"}) {
        if (read_file(first / f) == read_file(out / f)) ++same;
        else ++differ, which += std::string(" ") + f;
    }
    return {differ == 0, fmt("two pipeline runs, %zu/%zu files byte-identical%s", same, same + differ,
                             differ ? (" (differ:" + which + ")").c_str() : " incl. predictions, reports, checkpoint, manifest")};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::string work = (fs::temp_directory_path() / "gear_acceptance").string();
    app.add_option("--work", work, "scratch directory");
    CLI11_PARSE(app, argc, argv);

    std::printf("kernels: %s\n", std::string(kernels::isa_name(kernels::active().isa)).c_str());
    int failed = 0;
    auto report = [&](int n, const char* name, const std::function<Outcome()>& fn) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %d %-26s %s  %s\n", n, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    };

    report(1, "gradient fidelity", gradient_fidelity);
    report(2, "permutation invariance", permutation_invariance);
    report(3, "straight-line oracles", straight_line_oracles);
    report(4, "metric oracles", metric_oracles);
    Synthetic syn;
    LearningRuns runs;
    bool have_syn = false;
    try {
        syn = build_synthetic();
        have_syn = true;
    } catch (const std::exception& e) {
        std::printf("synthetic setup failed: %s\n", e.what());
    }
    auto need_syn = [&](auto fn) {
        return [&, fn]() -> Outcome {
            if (!have_syn) return {false, "no synthetic data"};
            return fn();
        };
    };
    report(5, "threshold filter", need_syn([&] { return threshold_filter(syn); }));
    report(6, "learning sanity", need_syn([&] { return learning_sanity(syn, runs); }));
    report(7, "evidence-enhanced", need_syn([&]() -> Outcome {
               if (runs.t1.size() != std::size(kSeeds)) return {false, "needs the runs of criterion 6"};
               return evidence_enhanced(syn, runs);
           }));
    report(8, "determinism", [&] { return determinism(fs::path(work) / "determinism"); });
    std::printf("%d of 8 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
