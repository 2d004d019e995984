#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "ranker_oracle.hpp"

using namespace expertfind;
using namespace fixture;

namespace {

/// Straight recomputation of the lexical stub from raw records.
struct StubOracle {
    std::map<std::string, double> cf;
    double total = 0;

    explicit StubOracle(const Corpus& c)
    {
        for (const auto& a : c.answers()) {
            for (const auto& t : ascii_tokens(a.text)) {
                cf[t] += 1;
                total += 1;
            }
        }
    }

    [[nodiscard]] double operator()(const std::string& query, const std::string& passage) const
    {
        const auto p = ascii_tokens(passage);
        double s = 0;
        for (const auto& t : ascii_tokens(query)) {
            const double tf = static_cast<double>(std::count(p.begin(), p.end(), t));
            const double c = cf.count(t) ? cf.at(t) : 0.0;
            s += std::log(1 + tf) * std::log(1 + total / (1 + c));
        }
        return s / (1 + s);
    }
};

/// Records every batch it is asked to score.
class RecordingScorer final : public PairScorer {
  public:
    std::vector<std::pair<std::string, std::vector<TextPair>>> calls;

    [[nodiscard]] std::string scorer_id() const override { return "recording"; }
    std::vector<double> score_batch(std::string_view model, std::span<const TextPair> pairs) override
    {
        calls.emplace_back(std::string(model), std::vector<TextPair>(pairs.begin(), pairs.end()));
        std::vector<double> out;
        for (const auto& p : pairs) {
            out.push_back(static_cast<double>(p.text.size()));
        }
        return out;
    }
};

class BrokenScorer final : public PairScorer {
  public:
    enum class Mode { throws, short_reply, nan };
    explicit BrokenScorer(Mode m) : mode_(m) {}

    [[nodiscard]] std::string scorer_id() const override { return "broken"; }
    std::vector<double> score_batch(std::string_view, std::span<const TextPair> pairs) override
    {
        switch (mode_) {
        case Mode::throws:
            throw std::runtime_error("model crashed");
        case Mode::short_reply:
            return std::vector<double>(pairs.size() - 1, 0.5);
        case Mode::nan:
            break;
        }
        std::vector<double> out(pairs.size(), 0.5);
        out.back() = std::nan("");
        return out;
    }

  private:
    Mode mode_;
};

struct Setup {
    Corpus corpus;
    IndexedCollection ix;
    QueryTopic q;
    RankedList initial;
    AnswerRanking d_q;

    explicit Setup(std::uint64_t seed, const std::string& query = "tax lien")
        : corpus(random_ranking_corpus(seed, 12, 70)), ix(IndexedCollection::build(corpus, Analyzer{})),
          q{"q" + std::to_string(seed), query, {}}
    {
        auto bm = score_bm25_documents(q, ix, Bm25Params{});
        initial = bm.lawyers;
        d_q = retrieve_answers(q, ix, Bm25Params{}, 50);
    }
};

std::vector<std::string> ids(const RankedList& r)
{
    std::vector<std::string> out;
    for (const auto& e : r.entries) {
        out.push_back(e.lawyer_id);
    }
    return out;
}

}  // namespace

TEST_CASE("k = 1 keeps the initial order")
{
    Setup s(1);
    ConstantScorer c(0.25);
    const auto r = rerank_vbd(s.q, s.initial, s.d_q, s.corpus, c, RerankOptions{1});
    CHECK(ids(r.ranking) == ids(s.initial));
    CHECK(r.s_bd.size() == 1);
    for (std::size_t i = 1; i < r.ranking.entries.size(); ++i) {
        REQUIRE(r.ranking.entries[i].score < r.ranking.entries[i - 1].score);
    }
    CHECK(r.ranking.run_tag == std::string("vbd"));
}

TEST_CASE("constant scorer counts answers")
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Setup s(seed);
        ConstantScorer c(1.0);
        const std::size_t k = 6;
        const auto r = rerank_vbd(s.q, s.initial, s.d_q, s.corpus, c, RerankOptions{k});
        std::map<std::string, double> count;
        for (std::size_t i = 0; i < k; ++i) {
            count[s.initial.entries[i].lawyer_id] = 0;
        }
        for (const auto& e : s.d_q.entries) {
            const auto& l = s.corpus.find_answer(e.doc_id)->lawyer_id;
            if (count.contains(l)) {
                count[l] += 1;
            }
        }
        CHECK(r.s_bd == count);
        std::vector<std::pair<double, std::string>> want;
        for (const auto& [l, n] : count) {
            want.emplace_back(-n, l);
        }
        std::sort(want.begin(), want.end());
        for (std::size_t i = 0; i < k; ++i) {
            REQUIRE(r.ranking.entries[i].lawyer_id == want[i].second);
            REQUIRE(r.ranking.entries[i].score == -want[i].first);
        }
        for (std::size_t i = k; i < s.initial.entries.size(); ++i) {
            REQUIRE(r.ranking.entries[i].lawyer_id == s.initial.entries[i].lawyer_id);
        }
    }
}

TEST_CASE("stub document scores equal a brute-force loop")
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Setup s(seed, "lien judge tax");
        StubScorer stub(s.ix);
        const StubOracle oracle(s.corpus);
        const auto r = rerank_vbd(s.q, s.initial, s.d_q, s.corpus, stub, RerankOptions{50});
        std::set<std::string> top;
        for (std::size_t i = 0; i < std::min<std::size_t>(50, s.initial.entries.size()); ++i) {
            top.insert(s.initial.entries[i].lawyer_id);
        }
        for (const auto& l : top) {
            double want = 0;
            for (const auto& e : s.d_q.entries) {
                const auto* a = s.corpus.find_answer(e.doc_id);
                if (a->lawyer_id == l) {
                    want += oracle(s.q.tag_text, a->text);
                }
            }
            REQUIRE(r.s_bd.at(l) == Catch::Approx(want).epsilon(1e-12));
        }
        // Same lawyer set as the input.
        auto a = ids(r.ranking);
        auto b = ids(s.initial);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
}

TEST_CASE("answer aggregation modes")
{
    auto corpus = Corpus::build({question("q1", {"t"}, 1)},
                                {answer("a1", "q1", "A", "xx"), answer("a2", "q1", "A", "xxxxxx"),
                                 answer("a3", "q1", "B", "xxxxx")},
                                {}, {lawyer("A"), lawyer("B")});
    RankedList initial{"q", {{"A", 2.0}, {"B", 1.0}}, "x"};
    AnswerRanking dq{"q", {{"a1", 1}, {"a2", 1}, {"a3", 1}}, 50};
    QueryTopic q{"q", "x", {}};
    RecordingScorer rec;
    const auto sum = rerank_vbd(q, initial, dq, corpus, rec, {2, AnswerAggregation::sum});
    CHECK(sum.s_bd.at("A") == 8.0);
    const auto mean = rerank_vbd(q, initial, dq, corpus, rec, {2, AnswerAggregation::mean});
    CHECK(mean.s_bd.at("A") == 4.0);
    CHECK(ids(mean.ranking) == std::vector<std::string>{"B", "A"});
    const auto mx = rerank_vbd(q, initial, dq, corpus, rec, {2, AnswerAggregation::max});
    CHECK(mx.s_bd.at("A") == 6.0);
    CHECK(rec.calls.front().first == "vbd");
    CHECK(rec.calls.front().second.size() == 3);
}

TEST_CASE("top-k lawyers without retrieved answers score zero")
{
    auto corpus = toy_corpus();
    RankedList initial{"q", {{"C", 3.0}, {"A", 2.0}, {"B", 1.0}}, "x"};
    AnswerRanking dq{"q", {{"a1", 1}}, 50};
    ConstantScorer c(0.5);
    const auto r = rerank_vbd(QueryTopic{"q", "tax", {}}, initial, dq, corpus, c, RerankOptions{3});
    CHECK(r.s_bd.at("C") == 0.0);
    CHECK(r.s_bd.at("B") == 0.0);
    CHECK(ids(r.ranking) == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("rerank preconditions")
{
    auto corpus = toy_corpus();
    ConstantScorer c;
    QueryTopic q{"q", "tax", {}};
    CHECK_THROWS_AS(rerank_vbd(q, RankedList{"q", {}, "x"}, AnswerRanking{}, corpus, c), InvalidArgument);
    CHECK_THROWS_AS(rerank_vbd(q, RankedList{"q", {{"A", 1}}, "x"}, AnswerRanking{}, corpus, c, RerankOptions{0}),
                    InvalidArgument);
    // No answers to score means no scorer call.
    BrokenScorer broken(BrokenScorer::Mode::throws);
    CHECK_NOTHROW(rerank_vbd(q, RankedList{"q", {{"A", 1}}, "x"}, AnswerRanking{"q", {}, 50}, corpus, broken));
}

TEST_CASE("scorer failures carry the scorer id and the pair")
{
    auto corpus = toy_corpus();
    RankedList initial{"q", {{"A", 2.0}, {"B", 1.0}}, "x"};
    AnswerRanking dq{"q", {{"a1", 1}, {"a4", 1}}, 50};
    QueryTopic q{"q", "tax debt", {}};
    for (auto mode : {BrokenScorer::Mode::throws, BrokenScorer::Mode::short_reply, BrokenScorer::Mode::nan}) {
        BrokenScorer b(mode);
        try {
            rerank_vbd(q, initial, dq, corpus, b);
            FAIL("expected ScorerError");
        } catch (const ScorerError& e) {
            CHECK(e.scorer_id() == "broken");
            CHECK(e.query() == "tax debt");
            CHECK((e.text() == "tax debt discharge tax" || e.text() == "debt collector calls debt debt"));
        }
    }
}

TEST_CASE("profile scoring")
{
    const auto corpus = toy_corpus();
    const auto ix = IndexedCollection::build(corpus, Analyzer{});
    QueryTopic q{"q", "tax debt", {}};

    SECTION("empty profiles score zero without scorer calls")
    {
        ProfileSet empty;
        empty.query_id = "q";
        empty.lawyer_id = "A";
        std::map<std::string, ProfileSet> profiles{{"A", empty}};
        RecordingScorer rec;
        const auto out = score_profiles(q, profiles, rec);
        CHECK(out.at("A") == ScoreVector{"q", "A"});
        CHECK(rec.calls.empty());
    }
    SECTION("identical texts get identical scores and models follow the kind")
    {
        ProfileSet set;
        set.query_id = "q";
        set.lawyer_id = "A";
        set.pp = Profile{"tax debt help", 3, {"a1#0"}};
        set.np = set.pp;
        set.rp = Profile{"debt", 1, {"a4"}};
        StubScorer stub(ix);
        const auto out = score_profiles(q, {{"A", set}}, stub);
        CHECK(out.at("A").s_pp == out.at("A").s_np);
        CHECK(out.at("A").s_cp == 0.0);
        RecordingScorer rec;
        score_profiles(q, {{"A", set}}, rec);
        std::vector<std::string> models;
        for (const auto& c : rec.calls) {
            models.push_back(c.first);
        }
        CHECK(models == std::vector<std::string>{"pp", "np", "rp"});
    }
    SECTION("pipeline scores equal direct scorer calls")
    {
        SentimentScorer sent(SentimentLexicon::builtin());
        Setup s(7, "tax debt");
        const auto profiles = build_profiles(s.q, s.d_q, s.corpus, sent, Analyzer{}, 7);
        StubScorer stub(s.ix);
        const auto out = score_profiles(s.q, profiles, stub);
        CHECK(out.size() == profiles.size());
        for (const auto& [l, set] : profiles) {
            for (auto k : profile_kinds) {
                const auto& p = set.get(k);
                const double direct = p.empty() ? 0.0 : stub.score(model_name(k), s.q.tag_text, p.text);
                auto v = out.at(l);
                REQUIRE(v.profile_score(k) == direct);
            }
        }
    }
}

TEST_CASE("score vectors merge document and profile scores")
{
    VbdResult vbd;
    vbd.s_bd = {{"A", 1.5}, {"B", 0.5}};
    std::map<std::string, ScoreVector> prof{{"A", ScoreVector{"q", "A", 0, 0.1, 0.2, 0.3, 0.4}}};
    const auto v = merge_score_vectors(QueryTopic{"q", "t", {}}, vbd, prof);
    REQUIRE(v.size() == 2);
    CHECK(v[0] == ScoreVector{"q", "A", 1.5, 0.1, 0.2, 0.3, 0.4});
    CHECK(v[1] == ScoreVector{"q", "B", 0.5, 0, 0, 0, 0});
}

TEST_CASE("stub scorer matches an independent implementation")
{
    const auto corpus = random_ranking_corpus(21, 8, 60);
    const auto ix = IndexedCollection::build(corpus, Analyzer{});
    StubScorer stub(ix);
    const StubOracle oracle(corpus);
    const std::vector<std::string> words{"tax", "debt", "lien", "judge", "credit", "unknown", "court", "seven"};
    Rng rng(3);
    auto phrase = [&](std::size_t n) {
        std::string out;
        for (std::size_t i = 0; i < n; ++i) {
            out += (i ? " " : "") + words[uniform_below(rng, words.size())];
        }
        return out;
    };
    for (int i = 0; i < 100; ++i) {
        const auto q = phrase(1 + uniform_below(rng, 4));
        const auto p = phrase(uniform_below(rng, 12));
        const double got = stub.score("vbd", q, p);
        REQUIRE(std::abs(got - oracle(q, p)) <= 1e-12);
        REQUIRE(got >= 0.0);
        REQUIRE(got < 1.0);
    }
    CHECK(stub.score("vbd", "tax", "court judge") == 0.0);
}

TEST_CASE("passage equal to the query scores highest among equal-length passages")
{
    // Holds for one-term queries and for queries whose terms share a collection frequency.
    const auto corpus = Corpus::build({question("q1", {"t"}, 1)},
                                      {answer("a1", "q1", "A", "tax lien court judge"),
                                       answer("a2", "q1", "A", "wage garnish home loan")},
                                      {}, {lawyer("A")});
    const auto ix = IndexedCollection::build(corpus, Analyzer{});
    StubScorer stub(ix);
    const std::vector<std::string> vocab{"tax", "lien", "court", "judge", "wage", "other"};
    for (const std::string query : {"tax", "tax lien", "court judge wage"}) {
        const auto n = ascii_tokens(query).size();
        const double self = stub.score("vbd", query, query);
        // Enumerate every passage of the same length over the vocabulary.
        std::vector<std::size_t> idx(n, 0);
        while (true) {
            std::string p;
            for (std::size_t i = 0; i < n; ++i) {
                p += (i ? " " : "") + vocab[idx[i]];
            }
            REQUIRE(stub.score("vbd", query, p) <= self);
            std::size_t pos = 0;
            while (pos < n && ++idx[pos] == vocab.size()) {
                idx[pos++] = 0;
            }
            if (pos == n) {
                break;
            }
        }
    }
}
