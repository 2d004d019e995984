#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "error.hpp"
#include "rankers.hpp"

namespace expertfind {

struct QueryMetrics {
    double ap = 0.0;
    double rr = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    double p5 = 0.0;

    friend bool operator==(const QueryMetrics&, const QueryMetrics&) = default;
};

struct EvalReport {
    std::map<std::string, QueryMetrics> per_query;
    QueryMetrics means;
    std::string run_tag;
    std::size_t n_queries = 0;
};

/// AP, RR and P@{1,2,5} of one ranking. AP is normalized by the number of
/// relevant lawyers, so unretrieved ones count as zero precision; missing
/// slots below k count as non-relevant.
inline QueryMetrics evaluate_query(const RankedList& run, const std::set<std::string>& relevant)
{
    QueryMetrics m;
    if (relevant.empty()) {
        return m;
    }
    std::set<std::string> seen;
    std::size_t rank = 0;
    std::size_t hits = 0;
    std::size_t hits_at[3] = {0, 0, 0};
    // Extended precision so the result is rounded once.
    long double precision_sum = 0.0L;
    for (const auto& e : run.entries) {
        if (!seen.insert(e.lawyer_id).second) {
            continue;
        }
        ++rank;
        if (relevant.contains(e.lawyer_id)) {
            ++hits;
            precision_sum += static_cast<long double>(hits) / static_cast<long double>(rank);
            if (m.rr == 0.0) {
                m.rr = 1.0 / static_cast<double>(rank);
            }
        }
        if (rank == 1) {
            hits_at[0] = hits;
        }
        if (rank <= 2) {
            hits_at[1] = hits;
        }
        if (rank <= 5) {
            hits_at[2] = hits;
        }
    }
    m.ap = static_cast<double>(precision_sum / static_cast<long double>(relevant.size()));
    m.p1 = static_cast<double>(hits_at[0]) / 1.0;
    m.p2 = static_cast<double>(hits_at[1]) / 2.0;
    m.p5 = static_cast<double>(hits_at[2]) / 5.0;
    return m;
}

inline QueryMetrics mean_metrics(const std::map<std::string, QueryMetrics>& per_query)
{
    QueryMetrics mean;
    if (per_query.empty()) {
        return mean;
    }
    for (const auto& [q, m] : per_query) {
        mean.ap += m.ap;
        mean.rr += m.rr;
        mean.p1 += m.p1;
        mean.p2 += m.p2;
        mean.p5 += m.p5;
    }
    const auto n = static_cast<double>(per_query.size());
    mean.ap /= n;
    mean.rr /= n;
    mean.p1 /= n;
    mean.p2 /= n;
    mean.p5 /= n;
    return mean;
}

/// Evaluates every ranked list against its query's relevant experts. Queries
/// present only in the judgments are ignored.
inline EvalReport evaluate_run(std::span<const RankedList> runs, std::span<const QueryTopic> qrels)
{
    std::map<std::string, const QueryTopic*> judged;
    for (const auto& q : qrels) {
        judged[q.query_id] = &q;
    }
    std::vector<std::string> missing;
    for (const auto& r : runs) {
        auto it = judged.find(r.query_id);
        if (it == judged.end() || it->second->relevant_experts.empty()) {
            missing.push_back(r.query_id);
        }
    }
    if (!missing.empty()) {
        std::string msg = "run queries without judgments:";
        for (const auto& q : missing) {
            msg += " " + q;
        }
        throw InvalidArgument(msg);
    }
    EvalReport report;
    for (const auto& r : runs) {
        if (report.run_tag.empty()) {
            report.run_tag = r.run_tag;
        }
        report.per_query[r.query_id] = evaluate_query(r, judged.at(r.query_id)->relevant_experts);
    }
    report.n_queries = report.per_query.size();
    report.means = mean_metrics(report.per_query);
    return report;
}

/// Sub-report over the given queries (those present in `report`).
inline EvalReport subset_report(const EvalReport& report, const std::set<std::string>& queries)
{
    EvalReport out;
    out.run_tag = report.run_tag;
    for (const auto& [q, m] : report.per_query) {
        if (queries.contains(q)) {
            out.per_query[q] = m;
        }
    }
    out.n_queries = out.per_query.size();
    out.means = mean_metrics(out.per_query);
    return out;
}

struct SeenUnseen {
    EvalReport seen;
    EvalReport unseen;
};

/// Splits test queries by whether they also occur among the training queries.
inline SeenUnseen seen_unseen_report(const EvalReport& test_report, const std::set<std::string>& train_queries,
                                     const std::set<std::string>& test_queries)
{
    std::set<std::string> seen;
    std::set<std::string> unseen;
    for (const auto& q : test_queries) {
        (train_queries.contains(q) ? seen : unseen).insert(q);
    }
    return {subset_report(test_report, seen), subset_report(test_report, unseen)};
}

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    bool significant = false;
};

/// One-tailed paired t-test of mean(a - b) > 0 with n - 1 degrees of freedom.
/// Zero-variance differences give t = +/-inf (p = 0 or 1); all-zero
/// differences give t = 0, p = 0.5.
inline TTestResult paired_ttest(std::span<const double> a, std::span<const double> b, double alpha = 0.05)
{
    if (a.size() != b.size()) {
        throw InvalidArgument("paired_ttest: sample sizes differ (" + std::to_string(a.size()) + " vs "
                              + std::to_string(b.size()) + ")");
    }
    if (a.size() < 2) {
        throw InvalidArgument("paired_ttest: need at least 2 pairs");
    }
    const auto n = static_cast<double>(a.size());
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        d[i] = a[i] - b[i];
    }
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : d) {
        ss += (x - mean) * (x - mean);
    }
    const double sd = std::sqrt(ss / (n - 1.0));

    TTestResult r;
    // Differences that are constant up to rounding count as zero variance.
    const double scale = std::max(1.0, std::abs(mean));
    if (sd <= 1e-12 * scale) {
        if (std::abs(mean) <= 1e-15) {
            r.t = 0.0;
            r.p = 0.5;
        } else {
            r.t = mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
            r.p = mean > 0 ? 0.0 : 1.0;
        }
    } else {
        r.t = mean / (sd / std::sqrt(n));
        boost::math::students_t dist(n - 1.0);
        r.p = boost::math::cdf(boost::math::complement(dist, r.t));
    }
    r.significant = r.p < alpha;
    return r;
}

enum class Metric { ap, rr, p1, p2, p5 };

inline double metric_value(const QueryMetrics& m, Metric which)
{
    switch (which) {
    case Metric::ap:
        return m.ap;
    case Metric::rr:
        return m.rr;
    case Metric::p1:
        return m.p1;
    case Metric::p2:
        return m.p2;
    case Metric::p5:
        return m.p5;
    }
    return 0.0;
}

/// Per-query metric pairs over the queries both reports share, in query order.
inline std::pair<std::vector<double>, std::vector<double>> paired_metric(const EvalReport& a, const EvalReport& b,
                                                                         Metric which)
{
    std::pair<std::vector<double>, std::vector<double>> out;
    for (const auto& [q, m] : a.per_query) {
        if (auto it = b.per_query.find(q); it != b.per_query.end()) {
            out.first.push_back(metric_value(m, which));
            out.second.push_back(metric_value(it->second, which));
        }
    }
    return out;
}

/// trec_eval-style summary.
inline void write_report_text(const EvalReport& r, std::ostream& out)
{
    auto line = [&](const char* name, double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.4f", v);
        out << name << "\tall\t" << buf << '\n';
    };
    out << "runid\tall\t" << r.run_tag << '\n';
    out << "num_q\tall\t" << r.n_queries << '\n';
    line("map", r.means.ap);
    line("recip_rank", r.means.rr);
    line("P_1", r.means.p1);
    line("P_2", r.means.p2);
    line("P_5", r.means.p5);
}

/// One JSON object per query plus a final `"query_id": "all"` line.
inline void write_report_jsonl(const EvalReport& r, std::ostream& out)
{
    auto obj = [&](const std::string& q, const QueryMetrics& m) {
        return nlohmann::json{{"query_id", q}, {"run_tag", r.run_tag}, {"ap", m.ap}, {"rr", m.rr},
                              {"p1", m.p1},    {"p2", m.p2},           {"p5", m.p5}};
    };
    for (const auto& [q, m] : r.per_query) {
        out << obj(q, m).dump() << '\n';
    }
    auto all = obj("all", r.means);
    all["n_queries"] = r.n_queries;
    out << all.dump() << '\n';
}

inline EvalReport read_report_jsonl(std::istream& in)
{
    EvalReport r;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto j = nlohmann::json::parse(line);
        QueryMetrics m{j.at("ap").get<double>(), j.at("rr").get<double>(), j.at("p1").get<double>(),
                       j.at("p2").get<double>(), j.at("p5").get<double>()};
        r.run_tag = j.value("run_tag", "");
        const auto q = j.at("query_id").get<std::string>();
        if (q == "all") {
            continue;
        }
        r.per_query[q] = m;
    }
    r.n_queries = r.per_query.size();
    r.means = mean_metrics(r.per_query);
    return r;
}

}  // namespace expertfind
