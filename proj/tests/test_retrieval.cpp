#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "gear/error.hpp"
#include "gear/retrieval.hpp"

using namespace gear;

namespace {

Document doc(std::string name, std::vector<std::string> lines) {
    Document d{std::move(name), {}};
    for (std::size_t i = 0; i < lines.size(); ++i) d.lines.emplace_back(static_cast<int>(i), lines[i]);
    return d;
}

std::vector<std::string> names(const std::vector<const Document*>& docs) {
    std::vector<std::string> out;
    for (const Document* d : docs) out.push_back(d->name);
    return out;
}

EvidenceSentence sent(std::string doc, int line, double score) { return {std::move(doc), line, "", score}; }

} // namespace

TEST_SUITE("retrieval") {

TEST_CASE("corpus jsonl round trip") {
    Corpus c;
    c.add(doc("Al Jardine", {"Alan Charles Jardine is an American musician.", "He is best known as rhythm guitarist."}));
    c.add(doc("Beach Boys", {"The Beach Boys are an American rock band."}));
    const Corpus back = Corpus::parse_jsonl(c.to_jsonl());
    REQUIRE(back.size() == 2);
    CHECK(*back.text({"Al Jardine", 1}) == "He is best known as rhythm guitarist.");
    CHECK(back.text({"Al Jardine", 9}) == nullptr);
    CHECK(back.find("Nope") == nullptr);
    CHECK_THROWS_AS(Corpus::parse_jsonl("{\"id\": 3}\n"), ParseError);
}

TEST_CASE("title match puts the named document first") {
    Corpus c;
    c.add(doc("Guitar", {"A guitar is a fretted instrument."}));
    c.add(doc("Al Jardine", {"Alan Charles Jardine is an American musician."}));
    c.add(doc("American", {"American may refer to many things."}));
    c.add(doc("Rhythm", {"Rhythm is movement marked by regular succession."}));
    const auto got = retrieve_documents("Al Jardine is an American rhythm guitarist", c);
    REQUIRE(!got.empty());
    CHECK(got.front()->name == "Al Jardine");
    CHECK(got.size() == 3);
}

TEST_CASE("no title overlap means nothing retrieved") {
    Corpus c;
    c.add(doc("Paris", {"Paris is a city."}));
    CHECK(retrieve_documents("Kira plays chess", c).empty());
}

TEST_CASE("equal overlap falls back to name order") {
    Corpus c;
    c.add(doc("Rome b", {"x"}));
    c.add(doc("Rome a", {"y"}));
    c.add(doc("Rome", {"z"}));
    const auto got = names(retrieve_documents("rome is old", c));
    CHECK(got == std::vector<std::string>{"Rome", "Rome a", "Rome b"});
}

TEST_CASE("at most k documents per query") {
    Corpus c;
    for (int i = 0; i < 12; ++i) c.add(doc("Lake " + std::to_string(100 + i), {"water"}));
    CHECK(retrieve_documents("the lake", c, 7).size() == 7);
    CHECK(retrieve_documents("the lake", c, 3).size() == 3);
}

TEST_CASE("score examples") {
    const SelectorParams zero{};
    CHECK(score_sentence(zero, "anything at all", "Doc", "whatever text") == 0.5);
    SelectorParams w{{2, 0, 0, 0}};
    CHECK(linear_score(w, {0.5, 0, 1, 1}) == 1.0);
    CHECK(logistic(linear_score(w, {0.5, 0, 1, 1})) == doctest::Approx(0.7310585786300049));
    SelectorParams pos{{1, 0, 0, 0}};
    CHECK(score_sentence(pos, "kira lives in rome", "Doc", "kira lives in rome") >
          score_sentence(pos, "kira lives in rome", "Doc", "bananas are yellow"));
}

TEST_CASE("features stay in range") {
    const SelectorFeatures f = selector_features("Kira lives in Rome", "Rome", "Kira lives in Rome.");
    for (double v : f) {
        CHECK(v >= 0.0);
        CHECK(std::isfinite(v));
    }
    CHECK(f[0] == 1.0);
    CHECK(f[2] == 1.0);
}

TEST_CASE("hinge") {
    CHECK(pair_hinge(0.8, 0.3) == doctest::Approx(0.5));
    CHECK(pair_hinge(2.0, 0.5) == 0.0);
    CHECK(pair_hinge(1.0, 0.0) == 0.0);
    // margin met: training on that pair leaves weights alone
    const std::vector<SelectorPair> pairs{{{1, 0, 0, 0}, {0, 0, 0, 0}}};
    const SelectorParams start = train_selector_replica(pairs, 0.1, 200, 1);
    const SelectorParams more = train_selector_replica(pairs, 0.1, 400, 1);
    CHECK(total_hinge_loss(start, pairs) == 0.0);
    CHECK(start.weights == more.weights);
}

TEST_CASE("separable toy set trains to low hinge loss") {
    const std::vector<std::string> claims{"kira lives in rome", "omar owns a red boat", "lena plays the violin",
                                          "the river floods in spring", "tom bakes fresh bread"};
    const std::vector<std::string> noise{"bananas are yellow", "the stock market closed", "cats sleep a lot",
                                         "winter is cold here", "a song about dogs"};
    std::vector<SelectorPair> pairs;
    for (std::size_t i = 0; i < claims.size(); ++i)
        for (std::size_t j = 0; j < noise.size(); ++j)
            pairs.push_back({selector_features(claims[i], "Doc", claims[i] + " indeed"),
                             selector_features(claims[i], "Other", noise[j])});
    const SelectorParams p = train_selector_replica(pairs, 0.1, 50, 3);
    CHECK(total_hinge_loss(p, pairs) < 0.1);
}

TEST_CASE("select_evidence examples") {
    std::vector<EvidenceSentence> seven;
    for (int i = 0; i < 7; ++i) seven.push_back(sent("D", i, 0.1 * (i + 1)));
    const auto top = select_evidence(seven, 0.0);
    REQUIRE(top.size() == 5);
    CHECK(top.front().line_num == 6);
    CHECK(top.back().line_num == 2);

    const std::vector<EvidenceSentence> three{sent("A", 0, 0.9), sent("A", 1, 0.0005), sent("A", 2, 0.0001)};
    const auto kept = select_evidence(three, 1e-3);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].score == 0.9);

    const std::vector<EvidenceSentence> low{sent("A", 0, 0.01), sent("B", 0, 0.03), sent("C", 0, 0.02)};
    const auto fallback = select_evidence(low, 0.5);
    REQUIRE(fallback.size() == 1);
    CHECK(fallback[0].doc_name == "B");

    CHECK(select_evidence(std::vector<EvidenceSentence>{}, 0.1).empty());
    CHECK_THROWS_AS(select_evidence(three, -1.0), ContractError);
}

TEST_CASE("select_evidence ties break on doc then line") {
    const std::vector<EvidenceSentence> tied{sent("B", 0, 0.5), sent("A", 3, 0.5), sent("A", 1, 0.5),
                                             sent("C", 0, 0.5), sent("A", 2, 0.5), sent("D", 0, 0.5)};
    const auto got = select_evidence(tied, 0.0);
    REQUIRE(got.size() == 5);
    CHECK(got[0].id() == SentenceId{"A", 1});
    CHECK(got[2].id() == SentenceId{"A", 3});
    CHECK(got[4].id() == SentenceId{"C", 0});
}

TEST_CASE("select_evidence shrinks monotonically in tau") {
    Rng rng(31);
    const double taus[] = {0.0, 1e-4, 1e-3, 1e-2, 1e-1, 0.5, 0.9};
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<EvidenceSentence> s;
        const std::size_t n = 1 + rng.below(12);
        for (std::size_t i = 0; i < n; ++i) {
            // mix of tiny and large scores around the sweep values
            const double score = rng.below(2) ? rng.uniform() : std::pow(10.0, -rng.uniform(0.0, 6.0));
            s.push_back(sent("D" + std::to_string(rng.below(4)), static_cast<int>(i), score));
        }
        std::set<SentenceId> prev;
        std::size_t prev_n = 99;
        for (double tau : taus) {
            const auto got = select_evidence(s, tau);
            CHECK(got.size() >= 1);
            CHECK(got.size() <= 5);
            CHECK(got.size() <= prev_n);
            std::set<SentenceId> ids;
            for (const auto& e : got) ids.insert(e.id());
            if (tau > 0.0)
                for (const auto& id : ids) CHECK(prev.count(id) == 1);
            if (tau == 0.0) CHECK(got.size() == std::min<std::size_t>(5, n));
            for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i - 1].score >= got[i].score);
            prev = ids;
            prev_n = got.size();
        }
    }
}

}
