#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "index.hpp"
#include "profiles.hpp"
#include "rankers.hpp"

namespace expertfind {

struct TextPair {
    std::string query;
    std::string text;
};

/// Model names understood by scorers: one head for answers, one per profile kind.
namespace models {
inline constexpr std::string_view vbd = "vbd";
}

inline std::string_view model_name(ProfileKind kind) { return kind_name(kind); }

/// A (query, passage) relevance scorer. Higher is more relevant; results must
/// be deterministic for fixed inputs and returned in request order.
class PairScorer {
  public:
    virtual ~PairScorer() = default;

    [[nodiscard]] virtual std::string scorer_id() const = 0;
    virtual std::vector<double> score_batch(std::string_view model, std::span<const TextPair> pairs) = 0;

    double score(std::string_view model, std::string query, std::string text)
    {
        TextPair p{std::move(query), std::move(text)};
        return score_batch(model, std::span<const TextPair>(&p, 1)).at(0);
    }
};

/// Always returns the same value.
class ConstantScorer final : public PairScorer {
  public:
    explicit ConstantScorer(double value = 1.0) : value_(value) {}

    [[nodiscard]] std::string scorer_id() const override { return "constant"; }
    std::vector<double> score_batch(std::string_view, std::span<const TextPair> pairs) override
    {
        return std::vector<double>(pairs.size(), value_);
    }

  private:
    double value_;
};

/// Deterministic lexical stand-in for the fine-tuned cross-encoder:
/// s = sum over query terms of log(1 + tf(t, passage)) * log(1 + |C| / (1 + cf(t))),
/// squashed to [0, 1) by s / (1 + s). Ignores the model name.
class StubScorer final : public PairScorer {
  public:
    explicit StubScorer(const IndexedCollection& ix)
        : analyzer_(ix.analyzer()), collection_len_(static_cast<double>(ix.collection_len()))
    {
        for (const auto& t : ix.terms()) {
            cf_.emplace(t, static_cast<double>(ix.collection_freq(t)));
        }
    }

    [[nodiscard]] std::string scorer_id() const override { return "stub-lexical"; }

    [[nodiscard]] double term_weight(const std::string& term) const
    {
        auto it = cf_.find(term);
        const double cf = it == cf_.end() ? 0.0 : it->second;
        return std::log(1.0 + collection_len_ / (1.0 + cf));
    }

    [[nodiscard]] double raw(std::string_view query, std::string_view passage) const
    {
        std::unordered_map<std::string, double> tf;
        analyzer_.analyze(passage, [&](std::string tok, TokenSpan) { tf[std::move(tok)] += 1.0; });
        double s = 0.0;
        analyzer_.analyze(query, [&](const std::string& tok, TokenSpan) {
            auto it = tf.find(tok);
            if (it != tf.end()) {
                s += std::log1p(it->second) * term_weight(tok);
            }
        });
        return s;
    }

    std::vector<double> score_batch(std::string_view, std::span<const TextPair> pairs) override
    {
        std::vector<double> out;
        out.reserve(pairs.size());
        for (const auto& p : pairs) {
            const double s = raw(p.query, p.text);
            out.push_back(s / (1.0 + s));
        }
        return out;
    }

  private:
    Analyzer analyzer_;
    double collection_len_;
    std::unordered_map<std::string, double> cf_;
};

inline StubScorer stub_scorer(const IndexedCollection& ix) { return StubScorer(ix); }

namespace detail {

/// Calls the scorer and converts failures and non-finite results into ScorerError.
inline std::vector<double> checked_scores(PairScorer& scorer, std::string_view model,
                                          std::span<const TextPair> pairs)
{
    if (pairs.empty()) {
        return {};
    }
    std::vector<double> scores;
    try {
        scores = scorer.score_batch(model, pairs);
    } catch (const ScorerError&) {
        throw;
    } catch (const std::exception& e) {
        throw ScorerError(scorer.scorer_id(), pairs.front().query, pairs.front().text, e.what());
    }
    if (scores.size() != pairs.size()) {
        throw ScorerError(scorer.scorer_id(), pairs.front().query, pairs.front().text,
                          "returned " + std::to_string(scores.size()) + " scores for " + std::to_string(pairs.size())
                              + " pairs");
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) {
            throw ScorerError(scorer.scorer_id(), pairs[i].query, pairs[i].text, "non-finite score");
        }
    }
    return scores;
}

}  // namespace detail

/// How per-answer scores become a lawyer score.
enum class AnswerAggregation { sum, mean, max };

struct RerankOptions {
    std::size_t k = 50;
    AnswerAggregation aggregation = AnswerAggregation::sum;
};

struct VbdResult {
    /// Re-ranked top-k block followed by the remaining lawyers in initial order.
    RankedList ranking;
    /// Document-based score of every lawyer in the top-k pool.
    std::map<std::string, double> s_bd;
};

inline constexpr const char* vbd_run_tag = "vbd";

/// Re-scores the answers in `d_q` of the top-k lawyers of `initial` and
/// re-ranks those lawyers by the aggregated answer score. Lawyers without
/// answers in `d_q` get 0. Lawyers below rank k keep their relative order
/// after the block; their scores are set below the block minimum so the list
/// stays non-increasing.
inline VbdResult rerank_vbd(const QueryTopic& q, const RankedList& initial, const AnswerRanking& d_q,
                            const Corpus& corpus, PairScorer& scorer, RerankOptions options = {})
{
    if (initial.entries.empty()) {
        throw InvalidArgument("rerank_vbd: empty initial ranking for query '" + q.query_id + "'");
    }
    if (options.k < 1) {
        throw InvalidArgument("rerank_vbd: k must be >= 1");
    }
    const std::size_t k = std::min(options.k, initial.entries.size());
    std::map<std::string, std::vector<std::size_t>> slots;  // lawyer -> pair positions
    for (std::size_t i = 0; i < k; ++i) {
        slots[initial.entries[i].lawyer_id];
    }
    std::vector<TextPair> pairs;
    for (const auto& e : d_q.entries) {
        const auto* a = corpus.find_answer(e.doc_id);
        if (a == nullptr) {
            throw InvalidArgument("answer ranking references unknown answer '" + e.doc_id + "'");
        }
        auto it = slots.find(a->lawyer_id);
        if (it == slots.end()) {
            continue;
        }
        it->second.push_back(pairs.size());
        pairs.push_back({q.tag_text, a->text});
    }
    const auto scores = detail::checked_scores(scorer, models::vbd, pairs);

    VbdResult out;
    std::vector<std::pair<std::string, double>> block;
    for (const auto& [lawyer, positions] : slots) {
        double s = 0.0;
        if (!positions.empty()) {
            switch (options.aggregation) {
            case AnswerAggregation::sum:
            case AnswerAggregation::mean:
                for (auto p : positions) {
                    s += scores[p];
                }
                if (options.aggregation == AnswerAggregation::mean) {
                    s /= static_cast<double>(positions.size());
                }
                break;
            case AnswerAggregation::max:
                s = scores[positions.front()];
                for (auto p : positions) {
                    s = std::max(s, scores[p]);
                }
                break;
            }
        }
        out.s_bd[lawyer] = s;
        block.emplace_back(lawyer, s);
    }
    out.ranking = detail::finish_linear(q.query_id, vbd_run_tag, std::move(block));
    const double floor = out.ranking.entries.back().score;
    for (std::size_t i = k; i < initial.entries.size(); ++i) {
        out.ranking.entries.push_back(
            {initial.entries[i].lawyer_id, floor - static_cast<double>(i - k + 1)});
    }
    return out;
}

/// Per-lawyer model scores feeding the final linear combination.
struct ScoreVector {
    std::string query_id;
    std::string lawyer_id;
    double s_bd = 0.0;
    double s_cp = 0.0;
    double s_pp = 0.0;
    double s_np = 0.0;
    double s_rp = 0.0;

    [[nodiscard]] double& profile_score(ProfileKind k)
    {
        switch (k) {
        case ProfileKind::cp:
            return s_cp;
        case ProfileKind::pp:
            return s_pp;
        case ProfileKind::np:
            return s_np;
        case ProfileKind::rp:
            return s_rp;
        }
        return s_cp;
    }

    friend bool operator==(const ScoreVector&, const ScoreVector&) = default;
};

/// Scores every non-empty profile once against the query text with the
/// profile kind's model; empty profiles score 0. Only profile fields are set.
inline std::map<std::string, ScoreVector> score_profiles(const QueryTopic& q,
                                                         const std::map<std::string, ProfileSet>& profiles,
                                                         PairScorer& scorer)
{
    std::map<std::string, ScoreVector> out;
    for (const auto& [lawyer, set] : profiles) {
        out[lawyer] = ScoreVector{q.query_id, lawyer};
    }
    for (auto kind : profile_kinds) {
        std::vector<TextPair> pairs;
        std::vector<std::string> owners;
        for (const auto& [lawyer, set] : profiles) {
            const auto& p = set.get(kind);
            if (!p.empty()) {
                pairs.push_back({q.tag_text, p.text});
                owners.push_back(lawyer);
            }
        }
        const auto scores = detail::checked_scores(scorer, model_name(kind), pairs);
        for (std::size_t i = 0; i < owners.size(); ++i) {
            out[owners[i]].profile_score(kind) = scores[i];
        }
    }
    return out;
}

/// One vector per lawyer of the re-rank pool: s_bd from `vbd`, profile
/// scores from `profile_scores` (0 when the lawyer has no profiles).
inline std::vector<ScoreVector> merge_score_vectors(const QueryTopic& q, const VbdResult& vbd,
                                                    const std::map<std::string, ScoreVector>& profile_scores)
{
    std::vector<ScoreVector> out;
    for (const auto& [lawyer, s_bd] : vbd.s_bd) {
        ScoreVector v{q.query_id, lawyer};
        if (auto it = profile_scores.find(lawyer); it != profile_scores.end()) {
            v = it->second;
        }
        v.s_bd = s_bd;
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace expertfind
