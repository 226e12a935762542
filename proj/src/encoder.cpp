#include "gear/encoder.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "gear/error.hpp"
#include "gear/text.hpp"

namespace gear {

std::string_view encoder_kind_name(EncoderKind k) {
    return k == EncoderKind::HashedBow ? "hashed_bow" : "precomputed";
}

EncoderKind parse_encoder_kind(std::string_view s) {
    if (s == "hashed_bow") return EncoderKind::HashedBow;
    if (s == "precomputed") return EncoderKind::Precomputed;
    throw ConfigError("unknown encoder kind '" + std::string(s) + "'");
}

void EncoderConfig::validate() const {
    if (feature_dim < 1) throw ConfigError("encoder feature_dim must be >= 1");
    if (buckets < 1) throw ConfigError("encoder buckets must be >= 1");
}

std::size_t token_bucket(std::string_view token, std::size_t buckets, std::uint64_t seed) {
    return static_cast<std::size_t>(hash_token(token, seed) % buckets);
}

std::vector<BagEntry> bag_of_words(std::string_view text, std::size_t buckets,
                                   std::uint64_t seed) {
    std::map<std::size_t, double> counts;
    for (const std::string& tok : tokenize(text)) counts[token_bucket(tok, buckets, seed)] += 1.0;
    std::vector<BagEntry> bag;
    bag.reserve(counts.size());
    for (const auto& [b, c] : counts) bag.push_back({b, c});
    return bag;
}

EncoderParams init_encoder_params(const EncoderConfig& cfg, Rng& rng) {
    cfg.validate();
    EncoderParams p;
    p.pair_proj = Parameter("encoder.pair_proj",
                            xavier_uniform(cfg.feature_dim, 2 * cfg.buckets, rng));
    p.claim_proj =
        Parameter("encoder.claim_proj", xavier_uniform(cfg.feature_dim, cfg.buckets, rng));
    return p;
}

BoundEncoder bind(Tape& tape, EncoderParams& p) {
    return {tape.param(p.pair_proj), tape.param(p.claim_proj)};
}

EncodedVars encode(const EncoderConfig& cfg, const BoundEncoder& enc, std::string_view claim,
                   std::span<const std::string> evidence) {
    if (evidence.empty()) throw EmptyAggregationError("encode: evidence list is empty");
    if (claim.empty()) throw ContractError("encode: claim is empty");
    const std::vector<BagEntry> claim_bag = bag_of_words(claim, cfg.buckets, cfg.hash_seed);
    EncodedVars out;
    out.claim = ad::tanh(ad::bag_project(enc.claim_proj, claim_bag));
    out.evidence.reserve(evidence.size());
    for (const std::string& ev : evidence) {
        std::vector<BagEntry> pair = bag_of_words(ev, cfg.buckets, cfg.hash_seed);
        for (const BagEntry& e : claim_bag) pair.push_back({e.column + cfg.buckets, e.count});
        out.evidence.push_back(ad::tanh(ad::bag_project(enc.pair_proj, pair)));
    }
    return out;
}

SentenceEncoding encode(const EncoderConfig& cfg, EncoderParams& params, std::string_view claim,
                        std::span<const std::string> evidence) {
    Tape tape;
    const EncodedVars vars = encode(cfg, bind(tape, params), claim, evidence);
    SentenceEncoding out;
    out.claim = vars.claim.value();
    for (const Var& e : vars.evidence) out.evidence.push_back(e.value());
    return out;
}

namespace {

Matrix parse_vector(std::string_view field, std::size_t dim, const std::string& source,
                    std::size_t line_no) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= field.size()) {
        std::size_t comma = field.find(',', pos);
        if (comma == std::string_view::npos) comma = field.size();
        std::string_view item = field.substr(pos, comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && (item.back() == ' ' || item.back() == '\r')) item.remove_suffix(1);
        double v = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size())
            throw ParseError(source, line_no, "bad real '" + std::string(item) + "'");
        if (!std::isfinite(v)) throw ParseError(source, line_no, "non-finite value");
        values.push_back(v);
        pos = comma + 1;
    }
    if (values.size() != dim)
        throw DimensionError(source + ":" + std::to_string(line_no) + ": vector has " +
                             std::to_string(values.size()) + " entries, expected F=" +
                             std::to_string(dim));
    return Matrix(dim, 1, std::move(values));
}

} // namespace

PrecomputedFeatures PrecomputedFeatures::parse(std::string_view text, std::size_t feature_dim,
                                               const std::string& source) {
    if (feature_dim < 1) throw ConfigError("precomputed features need F >= 1");
    PrecomputedFeatures out;
    out.feature_dim_ = feature_dim;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        std::size_t p = 0;
        while (true) {
            const std::size_t tab = line.find('\t', p);
            fields.push_back(line.substr(p, tab == std::string_view::npos ? line.npos : tab - p));
            if (tab == std::string_view::npos) break;
            p = tab + 1;
        }
        if (fields.size() < 3)
            throw ParseError(source, line_no,
                             "expected id, claim vector and at least one evidence vector");
        if (fields[0].empty()) throw ParseError(source, line_no, "empty example id");
        SentenceEncoding enc;
        enc.claim = parse_vector(fields[1], feature_dim, source, line_no);
        for (std::size_t i = 2; i < fields.size(); ++i)
            enc.evidence.push_back(parse_vector(fields[i], feature_dim, source, line_no));
        const std::string id(fields[0]);
        if (!out.records_.emplace(id, std::move(enc)).second)
            throw ParseError(source, line_no, "duplicate example id '" + id + "'");
    }
    return out;
}

PrecomputedFeatures PrecomputedFeatures::load(const std::filesystem::path& path,
                                              std::size_t feature_dim) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open feature file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), feature_dim, path.string());
}

const SentenceEncoding& PrecomputedFeatures::encode(const std::string& example_id) const {
    const auto it = records_.find(example_id);
    if (it == records_.end())
        throw ValidationError("no precomputed features for example '" + example_id + "'");
    return it->second;
}

void write_precomputed_record(std::ostream& out, const std::string& example_id,
                              const SentenceEncoding& enc) {
    auto put = [&](const Matrix& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out << ',';
            char buf[32];
            const auto res = std::to_chars(buf, buf + sizeof buf, v[i]);
            out.write(buf, res.ptr - buf);
        }
    };
    out << example_id << '\t';
    put(enc.claim);
    for (const Matrix& e : enc.evidence) {
        out << '\t';
        put(e);
    }
    out << '\n';
}

} // namespace gear
