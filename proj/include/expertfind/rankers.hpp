#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "index.hpp"

namespace expertfind {

struct RankedEntry {
    std::string lawyer_id;
    double score = 0.0;
};

/// Lawyers for one query, best first. Equal scores are ordered by lawyer id.
struct RankedList {
    std::string query_id;
    std::vector<RankedEntry> entries;
    std::string run_tag;
};

struct AnswerEntry {
    std::string doc_id;  // answer id
    double score = 0.0;
};

/// Answers for one query, best first (the retrieved set D_q).
struct AnswerRanking {
    std::string query_id;
    std::vector<AnswerEntry> entries;
    /// Number of top lawyers whose answers were kept; 0 means no cutoff.
    std::size_t lawyer_cutoff = 0;
};

namespace run_tags {
inline constexpr const char* model1_lm = "model1-lm";
inline constexpr const char* model2_lm = "model2-lm";
inline constexpr const char* model1_bm25 = "model1-bm25";
inline constexpr const char* model2_bm25 = "model2-bm25";
}  // namespace run_tags

/// How p(d|ca) is set for a candidate's documents.
enum class DocPrior {
    uniform,   // 1/|D_ca|, a proper mixture
    constant,  // 1
};

/// Length-dependent smoothing: lambda = beta / (beta + length).
struct SmoothingParams {
    double beta = 1.0;
    DocPrior doc_prior = DocPrior::uniform;

    [[nodiscard]] double lambda_doc(std::uint64_t doc_len) const
    {
        return beta / (beta + static_cast<double>(doc_len));
    }
    [[nodiscard]] double lambda_cand(std::uint64_t total_len) const
    {
        return beta / (beta + static_cast<double>(total_len));
    }
    [[nodiscard]] double doc_weight(std::size_t n_docs) const
    {
        return doc_prior == DocPrior::uniform ? 1.0 / static_cast<double>(n_docs) : 1.0;
    }
};

/// beta defaults to the mean answer length.
inline SmoothingParams default_smoothing(const IndexedCollection& ix)
{
    double mean = ix.mean_doc_len();
    return SmoothingParams{mean > 0 ? mean : 1.0, DocPrior::uniform};
}

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

inline std::vector<std::string> query_terms(const QueryTopic& q, const IndexedCollection& ix)
{
    auto terms = ix.analyzer().tokens(q.tag_text);
    if (terms.empty()) {
        throw InvalidArgument("query '" + q.query_id + "' is empty after analysis");
    }
    return terms;
}

namespace detail {

/// Sorts by log score (descending) then lawyer id and converts to linear scores.
inline RankedList finish_ranking(const std::string& query_id, const char* tag,
                                 std::vector<std::pair<std::string, double>> log_scores)
{
    std::sort(log_scores.begin(), log_scores.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    RankedList out{query_id, {}, tag};
    out.entries.reserve(log_scores.size());
    for (auto& [lawyer, log_score] : log_scores) {
        out.entries.push_back({std::move(lawyer), std::exp(log_score)});
    }
    return out;
}

inline RankedList finish_linear(const std::string& query_id, const char* tag,
                                std::vector<std::pair<std::string, double>> scores)
{
    std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    RankedList out{query_id, {}, tag};
    out.entries.reserve(scores.size());
    for (auto& [lawyer, s] : scores) {
        out.entries.push_back({std::move(lawyer), s});
    }
    return out;
}

inline AnswerRanking finish_answers(const std::string& query_id, const IndexedCollection& ix,
                                    std::vector<std::pair<DocId, double>> scores)
{
    std::sort(scores.begin(), scores.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return ix.doc_name(a.first) < ix.doc_name(b.first);
    });
    AnswerRanking out{query_id, {}, 0};
    out.entries.reserve(scores.size());
    for (const auto& [doc, s] : scores) {
        out.entries.push_back({ix.doc_name(doc), s});
    }
    return out;
}

inline double log_or_neg_inf(double x)
{
    return x > 0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

inline double log_add(double a, double b)
{
    if (a == -std::numeric_limits<double>::infinity()) {
        return b;
    }
    if (b == -std::numeric_limits<double>::infinity()) {
        return a;
    }
    double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace detail

/// Candidate-based language model: each lawyer's answers form one smoothed
/// term distribution, and the query likelihood under it is the score.
inline RankedList score_model1(const QueryTopic& q, const IndexedCollection& ix, const SmoothingParams& sp)
{
    const auto terms = query_terms(q, ix);
    std::vector<std::pair<std::string, double>> log_scores;
    log_scores.reserve(ix.candidates().size());

    std::unordered_map<std::string, std::size_t> slot;
    std::vector<std::uint64_t> cand_len;
    for (const auto& ca : ix.candidates()) {
        slot[ca] = log_scores.size();
        log_scores.emplace_back(ca, 0.0);
        std::uint64_t len = 0;
        for (auto d : ix.author_docs(ca)) {
            len += ix.doc_len(d);
        }
        cand_len.push_back(len);
    }

    std::vector<double> doc_mass(log_scores.size());
    for (const auto& t : terms) {
        std::fill(doc_mass.begin(), doc_mass.end(), 0.0);
        for (const auto& p : ix.postings(t)) {
            doc_mass[slot.at(ix.doc_author(p.doc))] += ix.term_prob_doc(t, p.doc);
        }
        const double pt = ix.collection_len() == 0 ? 0.0 : ix.collection_prob(t);
        for (std::size_t i = 0; i < log_scores.size(); ++i) {
            if (cand_len[i] == 0) {
                log_scores[i].second = -std::numeric_limits<double>::infinity();
                continue;
            }
            const double lambda = sp.lambda_cand(cand_len[i]);
            const double weight = sp.doc_weight(ix.author_docs(log_scores[i].first).size());
            const double mix = (1.0 - lambda) * doc_mass[i] * weight + lambda * pt;
            log_scores[i].second += detail::log_or_neg_inf(mix);
        }
    }
    return detail::finish_ranking(q.query_id, run_tags::model1_lm, std::move(log_scores));
}

struct Model2Result {
    RankedList lawyers;
    AnswerRanking answers;
};

/// Document-based language model: answers are scored by smoothed query
/// likelihood and each lawyer collects the weighted sum over their answers.
inline Model2Result score_model2(const QueryTopic& q, const IndexedCollection& ix, const SmoothingParams& sp)
{
    const auto terms = query_terms(q, ix);
    const auto n_docs = ix.doc_count();
    std::vector<double> log_rel(n_docs, 0.0);
    for (const auto& t : terms) {
        const double pt = ix.collection_len() == 0 ? 0.0 : ix.collection_prob(t);
        std::vector<std::uint32_t> tf(n_docs, 0);
        for (const auto& p : ix.postings(t)) {
            tf[p.doc] = p.tf;
        }
        for (std::size_t d = 0; d < n_docs; ++d) {
            const auto len = ix.doc_len(static_cast<DocId>(d));
            if (len == 0) {
                log_rel[d] = -std::numeric_limits<double>::infinity();
                continue;
            }
            const double lambda = sp.lambda_doc(len);
            const double ptd = static_cast<double>(tf[d]) / static_cast<double>(len);
            log_rel[d] += detail::log_or_neg_inf((1.0 - lambda) * ptd + lambda * pt);
        }
    }

    std::vector<std::pair<std::string, double>> lawyer_log;
    lawyer_log.reserve(ix.candidates().size());
    for (const auto& ca : ix.candidates()) {
        const auto& docs = ix.author_docs(ca);
        const double log_weight = std::log(sp.doc_weight(docs.size()));
        double acc = -std::numeric_limits<double>::infinity();
        for (auto d : docs) {
            acc = detail::log_add(acc, log_rel[d] + log_weight);
        }
        lawyer_log.emplace_back(ca, acc);
    }

    std::vector<std::pair<DocId, double>> doc_scores;
    for (std::size_t d = 0; d < n_docs; ++d) {
        if (log_rel[d] > -std::numeric_limits<double>::infinity()) {
            doc_scores.emplace_back(static_cast<DocId>(d), std::exp(log_rel[d]));
        }
    }
    return {detail::finish_ranking(q.query_id, run_tags::model2_lm, std::move(lawyer_log)),
            detail::finish_answers(q.query_id, ix, std::move(doc_scores))};
}

/// Okapi BM25 term weight with the non-negative idf log(1 + (N - df + 0.5) / (df + 0.5)).
inline double bm25_term_weight(double tf, double df, double n, double len, double avg_len, const Bm25Params& p)
{
    if (tf <= 0) {
        return 0.0;
    }
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    const double norm = avg_len > 0 ? len / avg_len : 0.0;
    return idf * tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * norm));
}

/// BM25 over one concatenated pseudo-document per lawyer.
inline RankedList score_bm25_candidates(const QueryTopic& q, const IndexedCollection& ix, const Bm25Params& params)
{
    const auto terms = query_terms(q, ix);
    const auto& cands = ix.candidates();
    std::unordered_map<std::string, std::size_t> slot;
    std::vector<double> cand_len(cands.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        slot[cands[i]] = i;
        for (auto d : ix.author_docs(cands[i])) {
            cand_len[i] += ix.doc_len(d);
        }
        total += cand_len[i];
    }
    const double n = static_cast<double>(cands.size());
    const double avg = n > 0 ? total / n : 0.0;

    std::vector<std::pair<std::string, double>> scores;
    for (const auto& c : cands) {
        scores.emplace_back(c, 0.0);
    }
    for (const auto& t : terms) {
        std::vector<double> tf(cands.size(), 0.0);
        for (const auto& p : ix.postings(t)) {
            tf[slot.at(ix.doc_author(p.doc))] += p.tf;
        }
        const double df = static_cast<double>(std::count_if(tf.begin(), tf.end(), [](double x) { return x > 0; }));
        for (std::size_t i = 0; i < cands.size(); ++i) {
            scores[i].second += bm25_term_weight(tf[i], df, n, cand_len[i], avg, params);
        }
    }
    return detail::finish_linear(q.query_id, run_tags::model1_bm25, std::move(scores));
}

struct Bm25DocumentResult {
    RankedList lawyers;
    AnswerRanking answers;
};

/// Standard BM25 over answers; each lawyer gets the sum over their answers.
inline Bm25DocumentResult score_bm25_documents(const QueryTopic& q, const IndexedCollection& ix,
                                               const Bm25Params& params)
{
    const auto terms = query_terms(q, ix);
    const double n = static_cast<double>(ix.doc_count());
    const double avg = ix.mean_doc_len();
    std::vector<double> doc_score(ix.doc_count(), 0.0);
    for (const auto& t : terms) {
        const auto& list = ix.postings(t);
        const double df = static_cast<double>(list.size());
        for (const auto& p : list) {
            doc_score[p.doc] += bm25_term_weight(p.tf, df, n, ix.doc_len(p.doc), avg, params);
        }
    }
    std::vector<std::pair<std::string, double>> lawyer_scores;
    for (const auto& ca : ix.candidates()) {
        double s = 0.0;
        for (auto d : ix.author_docs(ca)) {
            s += doc_score[d];
        }
        lawyer_scores.emplace_back(ca, s);
    }
    std::vector<std::pair<DocId, double>> docs;
    for (std::size_t d = 0; d < doc_score.size(); ++d) {
        if (doc_score[d] > 0) {
            docs.emplace_back(static_cast<DocId>(d), doc_score[d]);
        }
    }
    return {detail::finish_linear(q.query_id, run_tags::model2_bm25, std::move(lawyer_scores)),
            detail::finish_answers(q.query_id, ix, std::move(docs))};
}

struct Bm25Runs {
    RankedList candidate_level;
    RankedList document_level;
};

inline Bm25Runs score_bm25_variants(const QueryTopic& q, const IndexedCollection& ix, const Bm25Params& params)
{
    return {score_bm25_candidates(q, ix, params), score_bm25_documents(q, ix, params).lawyers};
}

/// D_q for profile building and re-ranking: positively scored answers (by
/// document-level BM25) of the top `lawyer_cutoff` lawyers.
inline AnswerRanking retrieve_answers(const QueryTopic& q, const IndexedCollection& ix, const Bm25Params& params,
                                      std::size_t lawyer_cutoff = 50)
{
    auto result = score_bm25_documents(q, ix, params);
    std::set<std::string> top;
    for (std::size_t i = 0; i < result.lawyers.entries.size() && i < lawyer_cutoff; ++i) {
        top.insert(result.lawyers.entries[i].lawyer_id);
    }
    AnswerRanking out{q.query_id, {}, lawyer_cutoff};
    for (auto& e : result.answers.entries) {
        auto doc = ix.find_doc(e.doc_id);
        if (doc && top.contains(ix.doc_author(*doc))) {
            out.entries.push_back(std::move(e));
        }
    }
    return out;
}

template <typename List>
struct CityFiltered {
    List list;
    /// Set when no lawyer in the index is located in the requested city.
    bool unknown_city = false;
};

/// Drops entries whose lawyer (or answer author) is not located in `asker_city`.
template <typename List>
CityFiltered<List> filter_by_city(const List& list, const std::string& asker_city, const IndexedCollection& ix)
{
    CityFiltered<List> out{list, false};
    out.list.entries.clear();
    if (!ix.knows_city(asker_city)) {
        out.unknown_city = true;
        return out;
    }
    for (const auto& e : list.entries) {
        std::optional<std::string> city;
        if constexpr (std::is_same_v<List, RankedList>) {
            city = ix.lawyer_city(e.lawyer_id);
        } else {
            if (auto d = ix.find_doc(e.doc_id)) {
                city = ix.doc_city(*d);
            }
        }
        if (city && *city == asker_city) {
            out.list.entries.push_back(e);
        }
    }
    return out;
}

}  // namespace expertfind
