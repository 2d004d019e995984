#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "aggregation.hpp"
#include "corpus.hpp"
#include "index.hpp"
#include "profiles.hpp"
#include "rankers.hpp"
#include "rerank.hpp"
#include "sentiment.hpp"

namespace expertfind {

struct PipelineOptions {
    /// beta <= 0 selects the mean answer length.
    SmoothingParams smoothing{0.0, DocPrior::uniform};
    Bm25Params bm25;
    RerankOptions rerank;
    ProfileOptions profile;
    std::uint64_t seed = 42;
};

/// Everything computed for one query.
struct QueryOutputs {
    RankedList model1;
    RankedList model2;
    RankedList bm25_candidates;
    RankedList bm25_documents;
    RankedList vbd;
    AnswerRanking d_q;
    std::map<std::string, ProfileSet> profiles;
    std::vector<ScoreVector> vectors;
};

inline RankedList without_lawyers(RankedList list, const std::set<std::string>& excluded)
{
    if (!excluded.empty()) {
        std::erase_if(list.entries, [&](const RankedEntry& e) { return excluded.contains(e.lawyer_id); });
    }
    return list;
}

/// Answers of the top `k` lawyers of a document-level ranking, in answer-score order.
inline AnswerRanking answers_of_top_lawyers(const RankedList& lawyers, const AnswerRanking& answers,
                                            const IndexedCollection& ix, std::size_t k)
{
    std::set<std::string> top;
    for (std::size_t i = 0; i < lawyers.entries.size() && i < k; ++i) {
        top.insert(lawyers.entries[i].lawyer_id);
    }
    AnswerRanking out{answers.query_id, {}, k};
    for (const auto& e : answers.entries) {
        auto doc = ix.find_doc(e.doc_id);
        if (doc && top.contains(ix.doc_author(*doc))) {
            out.entries.push_back(e);
        }
    }
    return out;
}

/// Runs the four lexical rankers, document-level BM25 retrieval of D_q, the
/// document-based re-rank and profile scoring for one query. Lawyers in
/// `excluded` are removed from every candidate list before re-ranking.
inline QueryOutputs run_query(const QueryTopic& q, const Corpus& corpus, const IndexedCollection& ix,
                              const SentimentScorer& sentiment, PairScorer& scorer, const PipelineOptions& options,
                              const std::set<std::string>& excluded = {})
{
    SmoothingParams sp = options.smoothing;
    if (sp.beta <= 0) {
        sp.beta = default_smoothing(ix).beta;
    }
    QueryOutputs out;
    out.model1 = without_lawyers(score_model1(q, ix, sp), excluded);
    out.model2 = without_lawyers(score_model2(q, ix, sp).lawyers, excluded);
    out.bm25_candidates = without_lawyers(score_bm25_candidates(q, ix, options.bm25), excluded);
    auto doc_level = score_bm25_documents(q, ix, options.bm25);
    out.bm25_documents = without_lawyers(std::move(doc_level.lawyers), excluded);
    out.d_q = answers_of_top_lawyers(out.bm25_documents, doc_level.answers, ix, options.rerank.k);

    if (out.bm25_documents.entries.empty()) {
        out.vbd = RankedList{q.query_id, {}, vbd_run_tag};
        return out;
    }
    auto vbd = rerank_vbd(q, out.bm25_documents, out.d_q, corpus, scorer, options.rerank);
    out.vbd = vbd.ranking;
    std::map<std::string, ScoreVector> profile_scores;
    if (!out.d_q.entries.empty()) {
        out.profiles = build_profiles(q, out.d_q, corpus, sentiment, ix.analyzer(), options.seed, options.profile);
        profile_scores = score_profiles(q, out.profiles, scorer);
    }
    out.vectors = merge_score_vectors(q, vbd, profile_scores);
    return out;
}

/// Final ranking: the re-rank pool ordered by aggregated score, followed by
/// the lawyers below the pool in their VBD order.
inline RankedList aggregated_run(const QueryOutputs& o, const WeightVector& w)
{
    auto top = aggregate_ranking(o.vbd.query_id, o.vectors, w);
    const std::size_t pool = o.vectors.size();
    const double floor = top.entries.empty() ? 0.0 : top.entries.back().score;
    for (std::size_t i = pool; i < o.vbd.entries.size(); ++i) {
        top.entries.push_back({o.vbd.entries[i].lawyer_id, floor - static_cast<double>(i - pool + 1)});
    }
    if (top.query_id.empty()) {
        top.query_id = o.vbd.query_id;
    }
    return top;
}

}  // namespace expertfind
