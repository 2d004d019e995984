#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "error.hpp"
#include "random.hpp"
#include "rankers.hpp"
#include "sentiment.hpp"
#include "text.hpp"

namespace expertfind {

enum class ProfileKind { cp, pp, np, rp };

inline constexpr std::array<ProfileKind, 4> profile_kinds{ProfileKind::cp, ProfileKind::pp, ProfileKind::np,
                                                         ProfileKind::rp};

inline constexpr std::string_view kind_name(ProfileKind k)
{
    switch (k) {
    case ProfileKind::cp:
        return "cp";
    case ProfileKind::pp:
        return "pp";
    case ProfileKind::np:
        return "np";
    case ProfileKind::rp:
        return "rp";
    }
    return "?";
}

struct Profile {
    std::string text;
    std::size_t token_count = 0;
    /// Comment ids (cp), `answer_id#sentence_index` (pp, np) or answer ids (rp).
    std::vector<std::string> source_units;

    [[nodiscard]] bool empty() const noexcept { return token_count == 0; }
    friend bool operator==(const Profile&, const Profile&) = default;
};

struct ProfileSet {
    std::string query_id;
    std::string lawyer_id;
    Profile cp;
    Profile pp;
    Profile np;
    Profile rp;
    std::uint64_t seed = 0;

    [[nodiscard]] const Profile& get(ProfileKind k) const
    {
        switch (k) {
        case ProfileKind::cp:
            return cp;
        case ProfileKind::pp:
            return pp;
        case ProfileKind::np:
            return np;
        case ProfileKind::rp:
            return rp;
        }
        return cp;
    }
    Profile& get(ProfileKind k) { return const_cast<Profile&>(std::as_const(*this).get(k)); }

    friend bool operator==(const ProfileSet&, const ProfileSet&) = default;
};

struct ProfileOptions {
    std::size_t max_tokens = 512;
};

namespace detail {

struct Unit {
    std::string id;
    std::string text;
};

/// Appends units until the token count first exceeds the limit, then cuts
/// the text back to exactly `max_tokens` tokens.
inline Profile fill_profile(const std::vector<Unit>& units, const Analyzer& analyzer, std::size_t max_tokens)
{
    Profile p;
    for (const auto& u : units) {
        const auto n = analyzer.count(u.text);
        if (n == 0) {
            continue;
        }
        if (!p.text.empty()) {
            p.text.push_back(' ');
        }
        p.text += u.text;
        p.token_count += n;
        p.source_units.push_back(u.id);
        if (p.token_count > max_tokens) {
            break;
        }
    }
    if (p.token_count > max_tokens) {
        p.text = std::string(analyzer.truncate(p.text, max_tokens));
        p.token_count = max_tokens;
    }
    return p;
}

}  // namespace detail

/// Seed of the shuffle for one (query, lawyer, profile kind).
inline std::uint64_t profile_stream_seed(std::uint64_t seed, std::string_view query_id, std::string_view lawyer_id,
                                         ProfileKind kind)
{
    return derive_seed(seed, query_id, lawyer_id, kind_name(kind));
}

/// Builds comment (cp), positive (pp), negative (np) and recency (rp)
/// profiles for every lawyer with at least one answer in `d_q`. Only answers
/// in `d_q` contribute.
inline std::map<std::string, ProfileSet> build_profiles(const QueryTopic& q, const AnswerRanking& d_q,
                                                        const Corpus& corpus, const SentimentScorer& sentiment,
                                                        const Analyzer& analyzer, std::uint64_t seed,
                                                        ProfileOptions options = {})
{
    if (d_q.entries.empty()) {
        throw InvalidArgument("build_profiles: empty answer ranking for query '" + q.query_id + "'");
    }
    std::map<std::string, std::vector<std::size_t>> answers_by_lawyer;
    for (const auto& e : d_q.entries) {
        const auto* a = corpus.find_answer(e.doc_id);
        if (a == nullptr) {
            throw InvalidArgument("answer ranking references unknown answer '" + e.doc_id + "'");
        }
        answers_by_lawyer[a->lawyer_id].push_back(corpus.answer_position(e.doc_id));
    }

    std::map<std::string, ProfileSet> out;
    for (const auto& [lawyer, positions] : answers_by_lawyer) {
        ProfileSet set;
        set.query_id = q.query_id;
        set.lawyer_id = lawyer;
        set.seed = seed;

        std::vector<detail::Unit> comments;
        std::vector<detail::Unit> positive;
        std::vector<detail::Unit> negative;
        for (auto pos : positions) {
            const auto& answer = corpus.answers()[pos];
            for (auto c : corpus.comments_of(pos)) {
                const auto& comment = corpus.comments()[c];
                auto sentences = split_sentences(comment.text);
                if (!sentences.empty()) {
                    comments.push_back({comment.id, std::move(sentences.front())});
                }
            }
            auto sentences = split_sentences(answer.text);
            for (std::size_t i = 0; i < sentences.size(); ++i) {
                const auto label = sentiment.score(sentences[i]).label;
                detail::Unit unit{answer.id + "#" + std::to_string(i), std::move(sentences[i])};
                if (label == SentimentLabel::positive) {
                    positive.push_back(std::move(unit));
                } else if (label == SentimentLabel::negative) {
                    negative.push_back(std::move(unit));
                }
            }
        }

        auto shuffled = [&](std::vector<detail::Unit> units, ProfileKind kind) {
            Rng rng(profile_stream_seed(seed, q.query_id, lawyer, kind));
            shuffle(std::span(units), rng);
            return units;
        };

        std::vector<std::size_t> by_recency = positions;
        std::sort(by_recency.begin(), by_recency.end(), [&](std::size_t a, std::size_t b) {
            const auto& x = corpus.answers()[a];
            const auto& y = corpus.answers()[b];
            return std::tie(y.timestamp, x.id) < std::tie(x.timestamp, y.id);
        });
        std::vector<detail::Unit> recent;
        for (auto pos : by_recency) {
            recent.push_back({corpus.answers()[pos].id, corpus.answers()[pos].text});
        }

        set.cp = detail::fill_profile(shuffled(std::move(comments), ProfileKind::cp), analyzer, options.max_tokens);
        set.pp = detail::fill_profile(shuffled(std::move(positive), ProfileKind::pp), analyzer, options.max_tokens);
        set.np = detail::fill_profile(shuffled(std::move(negative), ProfileKind::np), analyzer, options.max_tokens);
        set.rp = detail::fill_profile(recent, analyzer, options.max_tokens);
        out.emplace(lawyer, std::move(set));
    }
    return out;
}

/// One `{query_id, lawyer_id, kind, text}` line per profile.
inline void write_profiles(const std::map<std::string, ProfileSet>& profiles, std::ostream& out)
{
    for (const auto& [lawyer, set] : profiles) {
        for (auto kind : profile_kinds) {
            nlohmann::json j{{"query_id", set.query_id},
                             {"lawyer_id", set.lawyer_id},
                             {"kind", std::string(kind_name(kind))},
                             {"text", set.get(kind).text}};
            out << j.dump() << '\n';
        }
    }
}

}  // namespace expertfind
