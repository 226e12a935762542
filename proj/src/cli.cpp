#include "gear/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "gear/data.hpp"
#include "gear/io.hpp"
#include "gear/kernels.hpp"
#include "gear/model_check.hpp"
#include "gear/pipeline.hpp"

namespace gear::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

int exit_code(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::Io: return kExitIo;
    case ErrorCategory::Config: return kExitConfig;
    default: return kExitValidation;
    }
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace

std::map<std::string, std::string> parse_config(std::string_view text, const std::string& source) {
    std::map<std::string, std::string> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string line = trim(text.substr(start, end - start));
        ++line_no;
        start = end + 1;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError(where + "empty key");
        if (!out.emplace(key, value).second) throw ConfigError(where + "repeated key '" + key + "'");
    }
    return out;
}

namespace {

// ---- value parsing ----

double parse_real(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d))
        throw ConfigError(key + ": '" + v + "' is not a number");
    return d;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || ec != std::errc() || p != v.data() + v.size())
        throw ConfigError(key + ": '" + v + "' is not a non-negative integer");
    return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": '" + v + "' is not a boolean");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& v) {
    std::vector<std::uint64_t> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        std::size_t end = v.find(',', start);
        if (end == std::string::npos) end = v.size();
        out.push_back(parse_uint(key, trim(std::string_view(v).substr(start, end - start))));
        start = end + 1;
    }
    return out;
}

AggregatorKind parse_aggregator_key(const std::string& key, const std::string& v) {
    try {
        return parse_aggregator(v);
    } catch (const Error&) {
        throw ConfigError(key + ": '" + v + "' is not one of attention, max, mean");
    }
}

EncoderKind parse_encoder_kind(const std::string& key, const std::string& v) {
    if (v == "hashed_bow") return EncoderKind::HashedBow;
    if (v == "precomputed") return EncoderKind::Precomputed;
    throw ConfigError(key + ": '" + v + "' is not one of hashed_bow, precomputed");
}

// ---- settings keys ----

struct Key {
    std::string name;
    std::string help;
    std::function<void(const std::string&)> set;
    std::function<ordered_json()> get;
    bool boolean = false;
};

class Keys {
public:
    void add(std::string name, std::string help, std::function<void(const std::string&)> set,
             std::function<ordered_json()> get, bool boolean = false) {
        keys_.push_back({std::move(name), std::move(help), std::move(set), std::move(get), boolean});
    }

    // Every key becomes --key-with-dashes.
    void register_flags(CLI::App& app) {
        flag_values_.resize(keys_.size());
        for (std::size_t i = 0; i < keys_.size(); ++i) {
            std::string flag = keys_[i].name;
            std::replace(flag.begin(), flag.end(), '_', '-');
            CLI::Option* o = app.add_option("--" + flag, flag_values_[i], keys_[i].help);
            // Bare --flag means true.
            if (keys_[i].boolean) o->expected(0, 1);
        }
    }

    // Defaults < GEAR_SEED < config file < flags.
    void resolve(const std::optional<std::string>& config_path) {
        if (const char* env = std::getenv("GEAR_SEED"); env && *env && has("seed")) {
            try {
                find("seed")->set(env);
            } catch (const ConfigError& e) {
                throw ConfigError(std::string("GEAR_SEED: ") + e.what());
            }
        }
        if (config_path) {
            const auto values = parse_config(read_file(*config_path), *config_path);
            for (const auto& [k, v] : values) {
                Key* key = find(k);
                if (!key) throw ConfigError(*config_path + ": unknown key '" + k + "'");
                key->set(v);
            }
        }
        for (std::size_t i = 0; i < keys_.size(); ++i)
            if (flag_values_[i]) keys_[i].set(flag_values_[i]->empty() && keys_[i].boolean ? "true" : *flag_values_[i]);
    }

    ordered_json resolved() const {
        ordered_json j = ordered_json::object();
        for (const Key& k : keys_) j[k.name] = k.get();
        return j;
    }

private:
    bool has(std::string_view name) const {
        return std::any_of(keys_.begin(), keys_.end(), [&](const Key& k) { return k.name == name; });
    }
    Key* find(std::string_view name) {
        for (Key& k : keys_)
            if (k.name == name) return &k;
        return nullptr;
    }

    std::vector<Key> keys_;
    std::vector<std::optional<std::string>> flag_values_;
};

template <class T>
ordered_json opt_json(const std::optional<T>& v) {
    if (!v) return nullptr;
    if constexpr (std::is_same_v<T, fs::path>) return v->string();
    else return *v;
}

void add_path(Keys& keys, const std::string& name, const std::string& help, std::optional<fs::path>& slot) {
    keys.add(name, help, [&slot](const std::string& v) { slot = v.empty() ? std::nullopt : std::optional<fs::path>(v); },
             [&slot] { return opt_json(slot); });
}

void add_required_path(Keys& keys, const std::string& name, const std::string& help, fs::path& slot) {
    keys.add(name, help, [&slot](const std::string& v) { slot = v; },
             [&slot] { return slot.empty() ? ordered_json(nullptr) : ordered_json(slot.string()); });
}

void add_real(Keys& keys, const std::string& name, const std::string& help, double& slot) {
    keys.add(name, help, [&slot, name](const std::string& v) { slot = parse_real(name, v); },
             [&slot] { return ordered_json(slot); });
}

template <class T>
void add_uint(Keys& keys, const std::string& name, const std::string& help, T& slot) {
    keys.add(name, help, [&slot, name](const std::string& v) { slot = static_cast<T>(parse_uint(name, v)); },
             [&slot] { return ordered_json(slot); });
}

void add_bool(Keys& keys, const std::string& name, const std::string& help, bool& slot) {
    keys.add(name, help, [&slot, name](const std::string& v) { slot = parse_bool(name, v); },
             [&slot] { return ordered_json(slot); }, true);
}

void add_model_keys(Keys& keys, GearConfig& m) {
    add_uint(keys, "layers", "ERNet layers T (0..3)", m.num_layers);
    keys.add("aggregator", "attention, max or mean",
             [&m](const std::string& v) { m.aggregator = parse_aggregator_key("aggregator", v); },
             [&m] { return ordered_json(std::string(aggregator_name(m.aggregator))); });
    add_uint(keys, "hidden_dim", "attention MLP width H", m.hidden_dim);
    add_uint(keys, "feature_dim", "sentence feature size F", m.encoder.feature_dim);
    add_uint(keys, "buckets", "hashed bag-of-words buckets", m.encoder.buckets);
    add_uint(keys, "hash_seed", "token hash seed", m.encoder.hash_seed);
    keys.add("encoder_kind", "hashed_bow or precomputed",
             [&m](const std::string& v) { m.encoder.kind = parse_encoder_kind("encoder_kind", v); },
             [&m] {
                 return ordered_json(m.encoder.kind == EncoderKind::HashedBow ? "hashed_bow" : "precomputed");
             });
    add_bool(keys, "classifier_relu", "ReLU before the output softmax", m.classifier_relu);
    add_real(keys, "classifier_bias_init", "initial classifier bias", m.classifier_bias_init);
}

void add_train_keys(Keys& keys, TrainConfig& t) {
    add_uint(keys, "seed", "training seed (GEAR_SEED when unset)", t.seed);
    add_real(keys, "learning_rate", "Adam learning rate", t.learning_rate);
    add_real(keys, "weight_decay", "L2 coefficient", t.weight_decay);
    add_uint(keys, "batch_size", "examples per optimizer step", t.batch_size);
    add_uint(keys, "patience", "early stopping patience (epochs)", t.patience);
    add_uint(keys, "max_epochs", "epoch cap", t.max_epochs);
}

void add_selector_keys(Keys& keys, SelectorTrainConfig& s, std::size_t& docs_per_query, double& tau) {
    add_real(keys, "tau", "evidence score threshold", tau);
    add_uint(keys, "docs_per_query", "documents kept per query token", docs_per_query);
    add_real(keys, "selector_learning_rate", "sentence scorer learning rate", s.learning_rate);
    add_uint(keys, "selector_epochs", "sentence scorer epochs", s.epochs);
    add_uint(keys, "selector_negatives", "negatives per positive", s.negatives_per_positive);
    add_uint(keys, "selector_ensemble", "scorer replicas averaged", s.ensemble_size);
    add_uint(keys, "selector_seed", "scorer seed", s.seed);
}

// ---- manifest ----

std::string timestamp() {
    std::time_t t = std::time(nullptr);
    // Lets reproducibility checks pin the only varying manifest field.
    if (const char* e = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::strtoll(e, nullptr, 10));
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Manifest {
    std::string command;
    std::vector<std::string> args;
    ordered_json config;
    std::vector<std::pair<std::string, fs::path>> inputs;
    std::vector<std::pair<std::string, fs::path>> outputs;
    std::vector<std::uint64_t> seeds;

    void write(const fs::path& path) const {
        ordered_json j;
        j["format"] = "gear-manifest";
        j["version"] = 1;
        j["command"] = command;
        j["args"] = args;
        j["config"] = config;
        j["seeds"] = seeds;
        j["kernels"] = std::string(kernels::isa_name(kernels::active().isa));
        j["timestamp"] = timestamp();
        auto files = [](const auto& list) {
            ordered_json o = ordered_json::object();
            for (const auto& [name, p] : list) o[name] = {{"path", p.string()}, {"checksum", file_checksum(p)}};
            return o;
        };
        j["inputs"] = files(inputs);
        j["outputs"] = files(outputs);
        write_file(path, j.dump(2) + "\n");
    }
};

class Command {
public:
    virtual ~Command() = default;
    virtual int execute(std::ostream& out) = 0;
};

// ---- pipeline ----

class PipelineCommand : public Command {
public:
    explicit PipelineCommand(CLI::App& app) {
        sub_ = app.add_subcommand("pipeline", "retrieve, select, train and score");
        add_required_path(keys_, "corpus", "corpus JSONL", opt_.corpus);
        add_required_path(keys_, "train", "training claims (FEVER JSONL)", opt_.train);
        add_required_path(keys_, "dev", "dev claims (FEVER JSONL)", opt_.dev);
        add_required_path(keys_, "out", "output directory", out_);
        add_path(keys_, "evidence", "preselected evidence JSONL (skips retrieval)", opt_.evidence);
        add_path(keys_, "features", "precomputed features file", opt_.features);
        add_path(keys_, "checkpoint", "where to write the checkpoint (default <out>/checkpoint.json)", checkpoint_);
        add_path(keys_, "load_checkpoint", "evaluate this checkpoint instead of training", opt_.load_checkpoint);
        add_path(keys_, "export_attention", "write the attention maps of one dev claim as CSV", export_);
        keys_.add("export_id", "dev claim for --export-attention (default: first)",
                  [this](const std::string& v) { opt_.export_id = v; },
                  [this] { return ordered_json(opt_.export_id); });
        keys_.add("seeds", "comma-separated training seeds; best dev FEVER is kept",
                  [this](const std::string& v) { opt_.seeds = parse_seed_list("seeds", v); },
                  [this] { return ordered_json(opt_.seeds); });
        add_bool(keys_, "tau_sweep", "report evidence metrics for tau in {0,1e-4,1e-3,1e-2,1e-1}", opt_.tau_sweep);
        add_selector_keys(keys_, opt_.selector, opt_.docs_per_query, opt_.tau);
        add_model_keys(keys_, opt_.model);
        add_train_keys(keys_, opt_.train_config);
        sub_->add_option("--config", config_, "key = value settings file");
        keys_.register_flags(*sub_);
    }

    CLI::App* app() const { return sub_; }

    void resolve(const std::vector<std::string>& args) {
        args_ = args;
        keys_.resolve(config_);
    }

    int execute(std::ostream& out) override {
        for (auto [name, p] : {std::pair{"corpus", &opt_.corpus}, {"train", &opt_.train}, {"dev", &opt_.dev}, {"out", &out_}})
            if (p->empty()) throw ConfigError(std::string("pipeline needs --") + name);
        opt_.export_attention = export_.has_value();
        const PipelineResult res = run_pipeline(opt_);

        Manifest m{"pipeline", args_, keys_.resolved(), {}, {}, {}};
        m.inputs = {{"corpus", opt_.corpus}, {"train", opt_.train}, {"dev", opt_.dev}};
        if (opt_.evidence) m.inputs.emplace_back("evidence", *opt_.evidence);
        if (opt_.features) m.inputs.emplace_back("features", *opt_.features);
        if (opt_.load_checkpoint) m.inputs.emplace_back("load_checkpoint", *opt_.load_checkpoint);
        for (const SeedRun& r : res.runs) m.seeds.push_back(r.seed);

        auto emit = [&](const std::string& name, const fs::path& p, const std::string& text) {
            write_file(p, text);
            m.outputs.emplace_back(name, p);
        };
        emit("predictions", out_ / "predictions.jsonl", to_prediction_jsonl(res.predictions));
        ordered_json report = to_json(res.report);
        emit("report", out_ / "report.json", report.dump(2) + "\n");
        emit("report_text", out_ / "report.txt", to_text_table(res.report));
        ordered_json runs = ordered_json::array();
        for (const SeedRun& r : res.runs) runs.push_back(to_json(r));
        ordered_json runs_doc;
        runs_doc["runs"] = runs;
        runs_doc["selected"] = res.selected_run;
        double la = 0, fs_ = 0;
        for (const SeedRun& r : res.runs) la += r.dev_label_accuracy, fs_ += r.dev_fever_score;
        runs_doc["mean_dev_label_accuracy"] = la / res.runs.size();
        runs_doc["mean_dev_fever_score"] = fs_ / res.runs.size();
        emit("runs", out_ / "runs.json", runs_doc.dump(2) + "\n");
        std::string evidence = to_evidence_jsonl(res.train);
        evidence += to_evidence_jsonl(res.dev);
        emit("evidence", out_ / "evidence.jsonl", evidence);
        if (!opt_.load_checkpoint)
            emit("checkpoint", checkpoint_.value_or(out_ / "checkpoint.json"), checkpoint_to_string(res.checkpoint));
        if (!res.tau_sweep.empty()) {
            ordered_json sweep = ordered_json::array();
            for (const TauSweepRow& r : res.tau_sweep) sweep.push_back(to_json(r));
            emit("tau_sweep", out_ / "tau_sweep.json", sweep.dump(2) + "\n");
        }
        if (res.attention_csv) emit("attention", *export_, *res.attention_csv);
        m.write(out_ / "manifest.json");

        out << to_text_table(res.report);
        if (res.runs.size() > 1) {
            out << "\nruns (seed, best epoch, dev LA, dev FEVER)\n";
            char buf[96];
            for (std::size_t i = 0; i < res.runs.size(); ++i) {
                const SeedRun& r = res.runs[i];
                std::snprintf(buf, sizeof buf, "%-8llu %5zu %8.2f%% %8.2f%%%s\n",
                              static_cast<unsigned long long>(r.seed), r.best_epoch,
                              100 * r.dev_label_accuracy, 100 * r.dev_fever_score,
                              i == res.selected_run ? "  *" : "");
                out << buf;
            }
        }
        if (!res.tau_sweep.empty()) out << "\n" << tau_sweep_table(res.tau_sweep);
        return kExitOk;
    }

private:
    CLI::App* sub_ = nullptr;
    Keys keys_;
    PipelineOptions opt_;
    fs::path out_;
    std::optional<fs::path> checkpoint_;
    std::optional<fs::path> export_;
    std::optional<std::string> config_;
    std::vector<std::string> args_;
};

// ---- subsets ----

class SubsetsCommand : public Command {
public:
    explicit SubsetsCommand(CLI::App& app) {
        sub_ = app.add_subcommand("subsets", "difficult subset and evidence-enhanced evidence");
        add_required_path(keys_, "corpus", "corpus JSONL", corpus_);
        add_required_path(keys_, "train", "training claims (trains the sentence scorer)", train_);
        add_required_path(keys_, "dev", "dev claims", dev_);
        add_required_path(keys_, "out", "output directory", out_);
        add_selector_keys(keys_, selector_, docs_per_query_, tau_);
        sub_->add_flag("--difficult", difficult_, "write the difficult subsets");
        sub_->add_flag("--enhanced", enhanced_, "write evidence-enhanced evidence");
        sub_->add_option("--config", config_, "key = value settings file");
        keys_.register_flags(*sub_);
    }

    CLI::App* app() const { return sub_; }

    void resolve(const std::vector<std::string>& args) {
        args_ = args;
        keys_.resolve(config_);
    }

    int execute(std::ostream& out) override {
        for (auto [name, p] : {std::pair{"corpus", &corpus_}, {"train", &train_}, {"dev", &dev_}, {"out", &out_}})
            if (p->empty()) throw ConfigError(std::string("subsets needs --") + name);
        if (!(tau_ >= 0.0)) throw ConfigError("tau must be >= 0");
        if (!difficult_ && !enhanced_) difficult_ = enhanced_ = true;
        const Corpus corpus = Corpus::load_jsonl(corpus_);
        const DatasetSplit train = load_fever_jsonl(train_, corpus, "train");
        const DatasetSplit dev = load_fever_jsonl(dev_, corpus, "dev");
        Manifest m{"subsets", args_, keys_.resolved(), {{"corpus", corpus_}, {"train", train_}, {"dev", dev_}}, {}, {}};
        auto emit = [&](const std::string& name, const fs::path& p, const std::string& text) {
            write_file(p, text);
            m.outputs.emplace_back(name, p);
        };
        if (difficult_) {
            const DatasetSplit dt = build_difficult_subset(train);
            const DatasetSplit dd = build_difficult_subset(dev);
            emit("difficult_train", out_ / "difficult_train.jsonl", to_fever_jsonl(dt));
            emit("difficult_dev", out_ / "difficult_dev.jsonl", to_fever_jsonl(dd));
            out << "difficult: " << dt.examples.size() << " / " << train.examples.size() << " train, "
                << dd.examples.size() << " / " << dev.examples.size() << " dev\n";
        }
        if (enhanced_) {
            const auto pairs = build_selector_pairs(train, corpus, selector_, docs_per_query_);
            if (pairs.empty()) throw ValidationError("no selector training pairs: train has no resolved gold evidence");
            const SelectorEnsemble sel = train_selector(pairs, selector_);
            const DatasetSplit et =
                build_evidence_enhanced(train, score_split(train, corpus, sel, docs_per_query_), tau_);
            const DatasetSplit ed =
                build_evidence_enhanced(dev, score_split(dev, corpus, sel, docs_per_query_), tau_);
            emit("enhanced_evidence", out_ / "enhanced_evidence.jsonl", to_evidence_jsonl(et) + to_evidence_jsonl(ed));
            out << "enhanced: evidence for " << et.examples.size() + ed.examples.size() << " claims\n";
        }
        m.write(out_ / "manifest.json");
        return kExitOk;
    }

private:
    CLI::App* sub_ = nullptr;
    Keys keys_;
    fs::path corpus_, train_, dev_, out_;
    SelectorTrainConfig selector_;
    std::size_t docs_per_query_ = kDefaultDocsPerQuery;
    double tau_ = kDefaultTau;
    bool difficult_ = false;
    bool enhanced_ = false;
    std::optional<std::string> config_;
    std::vector<std::string> args_;
};

// ---- score ----

class ScoreCommand : public Command {
public:
    explicit ScoreCommand(CLI::App& app) {
        sub_ = app.add_subcommand("score", "score a predictions file against gold claims");
        sub_->add_option("--corpus", corpus_, "corpus JSONL")->required();
        sub_->add_option("--gold", gold_, "gold claims (FEVER JSONL)")->required();
        sub_->add_option("--predictions", predictions_, "predictions JSONL")->required();
        sub_->add_option("--report", report_, "also write the report as JSON");
    }

    CLI::App* app() const { return sub_; }

    int execute(std::ostream& out) override {
        const Corpus corpus = Corpus::load_jsonl(corpus_);
        const DatasetSplit gold = load_fever_jsonl(gold_, corpus, "gold");
        const auto preds = load_prediction_jsonl(predictions_);
        const EvaluationReport r = evaluate(gold.examples, preds);
        if (report_) write_file(*report_, to_json(r).dump(2) + "\n");
        out << to_text_table(r);
        return kExitOk;
    }

private:
    CLI::App* sub_ = nullptr;
    std::string corpus_, gold_, predictions_;
    std::optional<std::string> report_;
};

// ---- gradcheck ----

class GradcheckCommand : public Command {
public:
    explicit GradcheckCommand(CLI::App& app) {
        sub_ = app.add_subcommand("gradcheck", "finite-difference check of the full model");
        sub_->add_option("--trials", trials_, "random configurations")->capture_default_str();
        sub_->add_option("--tol", tol_, "max relative error")->capture_default_str();
        sub_->add_option("--seed", seed_, "configuration seed")->capture_default_str();
    }

    CLI::App* app() const { return sub_; }

    int execute(std::ostream& out) override {
        if (trials_ < 1) throw ConfigError("--trials must be >= 1");
        if (!(tol_ > 0.0)) throw ConfigError("--tol must be > 0");
        const ModelGradcheckReport r = run_model_gradcheck(trials_, seed_, tol_);
        char buf[160];
        for (std::size_t i = 0; i < r.trials.size(); ++i) {
            const auto& t = r.trials[i];
            std::snprintf(buf, sizeof buf, "trial %2zu  T=%zu %-9s relu=%d N=%zu F=%zu H=%zu  max rel err %.3e  %s\n", i,
                          t.config.num_layers, std::string(aggregator_name(t.config.aggregator)).c_str(),
                          t.config.classifier_relu ? 1 : 0, t.num_evidence, t.config.encoder.feature_dim,
                          t.config.hidden_dim, t.report.max_rel_error, t.report.passed ? "ok" : "FAIL");
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%s: %zu trials, max rel err %.3e (tol %.1e)\n",
                      r.passed ? "PASS" : "FAIL", r.trials.size(), r.max_rel_error, r.tolerance);
        out << buf;
        return r.passed ? kExitOk : kExitValidation;
    }

private:
    CLI::App* sub_ = nullptr;
    std::size_t trials_ = 20;
    double tol_ = kGradcheckTolerance;
    std::uint64_t seed_ = 1;
};

// ---- synth ----

class SynthCommand : public Command {
public:
    explicit SynthCommand(CLI::App& app) {
        sub_ = app.add_subcommand("synth", "write the synthetic two-hop dataset");
        add_required_path(keys_, "out", "output directory", out_);
        add_uint(keys_, "train_size", "training claims", cfg_.num_examples);
        add_uint(keys_, "dev_size", "dev claims", cfg_.dev_examples);
        add_uint(keys_, "seed", "generator seed (GEAR_SEED when unset)", cfg_.seed);
        add_uint(keys_, "facts_per_world", "claims per region", cfg_.facts_per_world);
        add_real(keys_, "nei_fraction", "share of NEI claims", cfg_.nei_fraction);
        add_real(keys_, "easy_fraction", "share of regions with one documented city", cfg_.easy_fraction);
        cfg_.dev_examples = 200;
        sub_->add_option("--config", config_, "key = value settings file");
        keys_.register_flags(*sub_);
    }

    CLI::App* app() const { return sub_; }

    void resolve(const std::vector<std::string>& args) {
        args_ = args;
        keys_.resolve(config_);
    }

    int execute(std::ostream& out) override {
        if (out_.empty()) throw ConfigError("synth needs --out");
        const SyntheticData d = generate_synthetic(cfg_);
        Manifest m{"synth", args_, keys_.resolved(), {}, {}, {cfg_.seed}};
        auto emit = [&](const std::string& name, const fs::path& p, const std::string& text) {
            write_file(p, text);
            m.outputs.emplace_back(name, p);
        };
        emit("corpus", out_ / "corpus.jsonl", d.corpus.to_jsonl());
        emit("train", out_ / "train.jsonl", to_fever_jsonl(d.train));
        emit("dev", out_ / "dev.jsonl", to_fever_jsonl(d.dev));
        m.write(out_ / "manifest.json");
        out << "wrote " << d.corpus.size() << " documents, " << d.train.examples.size() << " train and "
            << d.dev.examples.size() << " dev claims to " << out_.string() << "\n";
        return kExitOk;
    }

private:
    CLI::App* sub_ = nullptr;
    Keys keys_;
    SyntheticConfig cfg_;
    fs::path out_;
    std::optional<std::string> config_;
    std::vector<std::string> args_;
};

void print_error(std::ostream& err, ErrorCategory c, const std::string& message) {
    std::string one_line = message;
    std::replace(one_line.begin(), one_line.end(), '\n', ' ');
    err << "gear: error: " << category_name(c) << ": " << one_line << "\n";
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Claim verification over retrieved evidence graphs", "gear"};
    app.require_subcommand(1);
    PipelineCommand pipeline(app);
    SubsetsCommand subsets(app);
    ScoreCommand score(app);
    GradcheckCommand gradcheck(app);
    SynthCommand synth(app);
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        print_error(err, ErrorCategory::Config, e.what());
        return kExitConfig;
    }
    try {
        if (pipeline.app()->parsed()) {
            pipeline.resolve(args);
            return pipeline.execute(out);
        }
        if (subsets.app()->parsed()) {
            subsets.resolve(args);
            return subsets.execute(out);
        }
        if (synth.app()->parsed()) {
            synth.resolve(args);
            return synth.execute(out);
        }
        if (score.app()->parsed()) return score.execute(out);
        return gradcheck.execute(out);
    } catch (const Error& e) {
        print_error(err, e.category(), e.what());
        return exit_code(e.category());
    } catch (const std::bad_alloc&) {
        print_error(err, ErrorCategory::Contract, "out of memory");
        return kExitValidation;
    }
}

} // namespace gear::cli
