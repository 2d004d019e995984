#pragma once

#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"

namespace fixture {

inline const std::vector<std::string> kProfileSentences{
    "Thanks for the great question.", "This is a terrible situation.", "File chapter seven soon.",
    "You are lucky here.",            "The trustee is not helpful.",   "It is very good news!",
    "Unfortunately you will lose the car.", "Call my office.", "I hope that helps.",
    "Fraud claims are bad.",          "Wage garnishment can stop.",    "That is wonderful?"};

/// Random corpus with comments; every answer lives under one of a few questions.
inline Corpus profile_corpus(std::uint64_t seed, std::size_t n_lawyers = 6, std::size_t n_answers = 40)
{
    const auto& sentences = kProfileSentences;
    Rng rng(seed);
    std::vector<LawyerRef> ls;
    for (std::size_t i = 0; i < n_lawyers; ++i) {
        ls.push_back(lawyer("L" + std::to_string(i)));
    }
    std::vector<Question> qs;
    for (int i = 0; i < 4; ++i) {
        qs.push_back(question("q" + std::to_string(i), {"t"}, i + 1));
    }
    std::vector<Answer> as;
    std::vector<Comment> cs;
    for (std::size_t i = 0; i < n_answers; ++i) {
        std::string text;
        const auto n = 1 + uniform_below(rng, 6);
        for (std::size_t k = 0; k < n; ++k) {
            text += (k ? " " : "") + sentences[uniform_below(rng, sentences.size())];
        }
        const auto id = "a" + std::to_string(100 + i);
        // Few distinct timestamps so recency ties happen.
        as.push_back(answer(id, "q" + std::to_string(uniform_below(rng, 4)), ls[uniform_below(rng, n_lawyers)].lawyer_id,
                            text, false, static_cast<Timestamp>(50 + uniform_below(rng, 8))));
        const auto nc = uniform_below(rng, 3);
        for (std::size_t k = 0; k < nc; ++k) {
            cs.push_back(Comment{id + "c" + std::to_string(k), id,
                                 sentences[uniform_below(rng, sentences.size())] + " " + sentences[0],
                                 static_cast<Timestamp>(200 + k)});
        }
    }
    return Corpus::build(std::move(qs), std::move(as), std::move(cs), std::move(ls));
}

/// Random subset of answers in random order.
inline AnswerRanking random_dq(const Corpus& c, Rng& rng)
{
    AnswerRanking r{"q", {}, 50};
    for (const auto& a : c.answers()) {
        if (bernoulli(rng, 0.6)) {
            r.entries.push_back({a.id, uniform_real(rng)});
        }
    }
    if (r.entries.empty()) {
        r.entries.push_back({c.answers().front().id, 1.0});
    }
    shuffle(std::span(r.entries), rng);
    return r;
}

inline const QueryTopic kProfileQuery{"q", "tax", {}};

/// Fisher-Yates written out separately from the library helper.
template <typename T>
void replay_shuffle(std::vector<T>& v, std::uint64_t seed)
{
    Rng rng(seed);
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::uint64_t bound = i;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max()
            - (std::numeric_limits<std::uint64_t>::max() % bound);
        std::uint64_t x = rng();
        while (x >= limit) {
            x = rng();
        }
        std::swap(v[i - 1], v[x % bound]);
    }
}

/// Checks containment, sentiment, recency, token-cap and rerun invariants for
/// one seeded case. Returns an empty string when all hold.
inline std::string check_profile_case(std::uint64_t seed)
{
    SentimentScorer s(SentimentLexicon::builtin());
    Analyzer an;
    const auto corpus = profile_corpus(seed, 5, 30);
    Rng rng(seed);
    const auto dq = random_dq(corpus, rng);
    std::set<std::string> in_dq;
    for (const auto& e : dq.entries) {
        in_dq.insert(e.doc_id);
    }
    const auto opts = ProfileOptions{seed % 2 ? std::size_t{512} : std::size_t{10}};
    const auto profiles = build_profiles(kProfileQuery, dq, corpus, s, an, seed, opts);
    const auto again = build_profiles(kProfileQuery, dq, corpus, s, an, seed, opts);
    if (!(profiles == again)) {
        return "rerun differs";
    }
    std::ostringstream o1;
    std::ostringstream o2;
    write_profiles(profiles, o1);
    write_profiles(again, o2);
    if (o1.str() != o2.str()) {
        return "export bytes differ";
    }

    auto fail = [&](const std::string& lawyer_id, const std::string& what) {
        return "lawyer " + lawyer_id + ": " + what;
    };
    for (const auto& [lawyer_id, set] : profiles) {
        for (auto k : profile_kinds) {
            const auto& p = set.get(k);
            if (p.token_count > opts.max_tokens) {
                return fail(lawyer_id, "over the token cap");
            }
            if (an.count(p.text) != p.token_count) {
                return fail(lawyer_id, "token_count disagrees with text");
            }
        }
        auto check_sentences = [&](const Profile& p, SentimentLabel want) -> std::string {
            for (const auto& unit : p.source_units) {
                const auto hash = unit.find('#');
                const auto* a = corpus.find_answer(unit.substr(0, hash));
                if (a == nullptr || a->lawyer_id != lawyer_id || !in_dq.contains(a->id)) {
                    return fail(lawyer_id, "sentence unit " + unit + " outside the lawyer's retrieved answers");
                }
                const auto sents = split_sentences(a->text);
                const auto idx = std::stoul(unit.substr(hash + 1));
                if (idx >= sents.size() || s.score(sents[idx]).label != want) {
                    return fail(lawyer_id, "sentence unit " + unit + " has the wrong polarity");
                }
            }
            return {};
        };
        if (auto e = check_sentences(set.pp, SentimentLabel::positive); !e.empty()) {
            return e;
        }
        if (auto e = check_sentences(set.np, SentimentLabel::negative); !e.empty()) {
            return e;
        }
        for (const auto& unit : set.cp.source_units) {
            const Comment* cm = nullptr;
            for (const auto& x : corpus.comments()) {
                if (x.id == unit) {
                    cm = &x;
                }
            }
            if (cm == nullptr || !in_dq.contains(cm->answer_id)
                || corpus.find_answer(cm->answer_id)->lawyer_id != lawyer_id) {
                return fail(lawyer_id, "comment unit " + unit + " outside the lawyer's retrieved answers");
            }
        }
        Timestamp prev = std::numeric_limits<Timestamp>::max();
        for (const auto& unit : set.rp.source_units) {
            const auto* a = corpus.find_answer(unit);
            if (a == nullptr || !in_dq.contains(a->id)) {
                return fail(lawyer_id, "recency unit " + unit + " outside retrieved answers");
            }
            if (a->timestamp > prev) {
                return fail(lawyer_id, "recency units out of order");
            }
            prev = a->timestamp;
        }
        if (opts.max_tokens == 512) {
            // Short answers never hit the cap, so the recency profile holds all of them.
            std::size_t n = 0;
            for (const auto& e : dq.entries) {
                n += corpus.find_answer(e.doc_id)->lawyer_id == lawyer_id ? 1 : 0;
            }
            if (set.rp.source_units.size() != n) {
                return fail(lawyer_id, "recency profile misses answers");
            }
        }
    }
    return {};
}

}  // namespace fixture
