#pragma once
// Sentence encoders producing the claim vector c and claim-conditioned
// evidence vectors e_i.
//
// hashed_bow: c   = tanh(Q * bow(claim))
//             e_i = tanh(P * [bow(evidence_i) ; bow(claim)])
// with Q in R^{F x B} and P in R^{F x 2B}, B hash buckets.
//
// precomputed: vectors read from a feature file keyed by example id.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gear/autodiff.hpp"
#include "gear/random.hpp"

namespace gear {

enum class EncoderKind { HashedBow, Precomputed };

std::string_view encoder_kind_name(EncoderKind k);
EncoderKind parse_encoder_kind(std::string_view s);

struct EncoderConfig {
    std::size_t feature_dim = 32;
    std::size_t buckets = 256;
    EncoderKind kind = EncoderKind::HashedBow;
    std::uint64_t hash_seed = 0x6765617200000001ULL;

    void validate() const;
};

struct SentenceEncoding {
    Matrix claim;                  // F x 1
    std::vector<Matrix> evidence;  // N entries, each F x 1
};

// Tape-resident counterpart of SentenceEncoding.
struct EncodedVars {
    Var claim;
    std::vector<Var> evidence;
};

struct EncoderParams {
    Parameter pair_proj;  // F x 2B
    Parameter claim_proj; // F x B
};

// Sparse hashed bag of words; entries sorted by bucket.
std::vector<BagEntry> bag_of_words(std::string_view text, std::size_t buckets,
                                   std::uint64_t seed);

std::size_t token_bucket(std::string_view token, std::size_t buckets, std::uint64_t seed);

EncoderParams init_encoder_params(const EncoderConfig& cfg, Rng& rng);

struct BoundEncoder {
    Var pair_proj;
    Var claim_proj;
};

BoundEncoder bind(Tape& tape, EncoderParams& p);

EncodedVars encode(const EncoderConfig& cfg, const BoundEncoder& enc, std::string_view claim,
                   std::span<const std::string> evidence);

// Value-only convenience over a private tape.
SentenceEncoding encode(const EncoderConfig& cfg, EncoderParams& params, std::string_view claim,
                        std::span<const std::string> evidence);

// Features produced outside this program, one record per example.
class PrecomputedFeatures {
public:
    // Format: example_id TAB c TAB e_1 TAB ... TAB e_N, each vector F
    // comma-separated reals.
    static PrecomputedFeatures load(const std::filesystem::path& path, std::size_t feature_dim);
    static PrecomputedFeatures parse(std::string_view text, std::size_t feature_dim,
                                     const std::string& source = "<memory>");

    const SentenceEncoding& encode(const std::string& example_id) const;
    bool contains(const std::string& example_id) const { return records_.contains(example_id); }
    std::size_t feature_dim() const noexcept { return feature_dim_; }
    std::size_t size() const noexcept { return records_.size(); }

private:
    std::size_t feature_dim_ = 0;
    std::map<std::string, SentenceEncoding> records_;
};

void write_precomputed_record(std::ostream& out, const std::string& example_id,
                              const SentenceEncoding& enc);

} // namespace gear
