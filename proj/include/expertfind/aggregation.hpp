#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "rankers.hpp"
#include "rerank.hpp"

namespace expertfind {

/// Integer weights of the document score and the four profile scores.
struct WeightVector {
    int w_bd = 1;
    int w_cp = 1;
    int w_pp = 1;
    int w_np = 1;
    int w_rp = 1;

    [[nodiscard]] std::array<int, 5> as_array() const { return {w_bd, w_cp, w_pp, w_np, w_rp}; }
    static WeightVector from_array(const std::array<int, 5>& a) { return {a[0], a[1], a[2], a[3], a[4]}; }

    auto operator<=>(const WeightVector&) const = default;
};

inline double aggregate(const ScoreVector& s, const WeightVector& w)
{
    return w.w_bd * s.s_bd + w.w_cp * s.s_cp + w.w_pp * s.s_pp + w.w_np * s.s_np + w.w_rp * s.s_rp;
}

inline constexpr const char* aggregated_run_tag = "vbd-profiles";

/// Ranks the query's pool by aggregated score (ties by lawyer id).
inline RankedList aggregate_ranking(const std::string& query_id, const std::vector<ScoreVector>& vectors,
                                    const WeightVector& w)
{
    std::vector<std::pair<std::string, double>> scores;
    scores.reserve(vectors.size());
    for (const auto& v : vectors) {
        scores.emplace_back(v.lawyer_id, aggregate(v, w));
    }
    return detail::finish_linear(query_id, aggregated_run_tag, std::move(scores));
}

enum class SearchStrategy { coordinate_ascent, exhaustive };

struct SearchConfig {
    int lo = 1;
    int hi = 100;
    SearchStrategy strategy = SearchStrategy::coordinate_ascent;
    std::size_t max_sweeps = 1000;
};

struct TuningResult {
    WeightVector weights;
    double objective = 0.0;
    std::size_t evaluations = 0;
};

/// Mean objective over the split's queries when each pool is ranked by the
/// aggregated score. Queries without vectors contribute 0.
inline double split_objective(const DatasetSplit& split,
                              const std::map<std::string, std::vector<ScoreVector>>& vectors_by_query,
                              const WeightVector& w, Metric objective = Metric::ap)
{
    if (split.queries.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (const auto& q : split.queries) {
        auto it = vectors_by_query.find(q.query_id);
        if (it == vectors_by_query.end()) {
            continue;
        }
        total += metric_value(evaluate_query(aggregate_ranking(q.query_id, it->second, w), q.relevant_experts),
                              objective);
    }
    return total / static_cast<double>(split.queries.size());
}

inline std::map<std::string, std::vector<ScoreVector>> group_by_query(const std::vector<ScoreVector>& vectors)
{
    std::map<std::string, std::vector<ScoreVector>> out;
    for (const auto& v : vectors) {
        out[v.query_id].push_back(v);
    }
    return out;
}

/// Grid search for the weights maximizing the validation objective.
///
/// Coordinate ascent starts from (lo, ..., lo) and sweeps the coordinates in
/// order, moving each to the best value on its line when that strictly
/// improves the objective, until a full sweep makes no move. Exhaustive mode
/// visits the whole grid. Among all visited vectors the best objective wins,
/// ties going to the lexicographically smallest vector.
inline TuningResult tune_weights(const DatasetSplit& valid, const std::vector<ScoreVector>& vectors,
                                 Metric objective = Metric::ap, SearchConfig config = {})
{
    if (valid.queries.empty()) {
        throw InvalidArgument("tune_weights: empty validation split");
    }
    if (config.lo < 1 || config.hi < config.lo) {
        throw InvalidArgument("tune_weights: invalid weight range");
    }
    const auto by_query = group_by_query(vectors);
    constexpr double eps = 1e-12;

    TuningResult best;
    best.objective = -1.0;
    std::map<std::array<int, 5>, double> memo;
    auto evaluate = [&](const std::array<int, 5>& w) {
        if (auto it = memo.find(w); it != memo.end()) {
            return it->second;
        }
        const double v = split_objective(valid, by_query, WeightVector::from_array(w), objective);
        ++best.evaluations;
        memo.emplace(w, v);
        const auto wv = WeightVector::from_array(w);
        if (v > best.objective + eps || (std::abs(v - best.objective) <= eps && wv < best.weights)) {
            best.objective = v;
            best.weights = wv;
        }
        return v;
    };

    if (config.strategy == SearchStrategy::exhaustive) {
        std::array<int, 5> w{};
        for (w[0] = config.lo; w[0] <= config.hi; ++w[0]) {
            for (w[1] = config.lo; w[1] <= config.hi; ++w[1]) {
                for (w[2] = config.lo; w[2] <= config.hi; ++w[2]) {
                    for (w[3] = config.lo; w[3] <= config.hi; ++w[3]) {
                        for (w[4] = config.lo; w[4] <= config.hi; ++w[4]) {
                            evaluate(w);
                        }
                    }
                }
            }
        }
        return best;
    }

    std::array<int, 5> current;
    current.fill(config.lo);
    double current_value = evaluate(current);
    for (std::size_t sweep = 0; sweep < config.max_sweeps; ++sweep) {
        bool moved = false;
        for (std::size_t i = 0; i < current.size(); ++i) {
            int line_best = current[i];
            double line_value = current_value;
            for (int v = config.lo; v <= config.hi; ++v) {
                auto w = current;
                w[i] = v;
                const double value = evaluate(w);
                if (value > line_value + eps) {
                    line_value = value;
                    line_best = v;
                }
            }
            if (line_value > current_value + eps) {
                current[i] = line_best;
                current_value = line_value;
                moved = true;
            }
        }
        if (!moved) {
            break;
        }
    }
    return best;
}

/// `w_bd w_cp w_pp w_np w_rp` on the first line, `<metric> <value>` on the second.
inline void write_weights(const TuningResult& r, const std::string& metric_name, std::ostream& out)
{
    const auto w = r.weights.as_array();
    out << w[0] << ' ' << w[1] << ' ' << w[2] << ' ' << w[3] << ' ' << w[4] << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", r.objective);
    out << metric_name << ' ' << buf << '\n';
}

inline WeightVector read_weights(std::istream& in)
{
    std::array<int, 5> w{};
    for (auto& x : w) {
        if (!(in >> x)) {
            throw Error("weights file: expected five integers");
        }
        if (x < 1 || x > 100) {
            throw Error("weights file: weight out of [1, 100]");
        }
    }
    return WeightVector::from_array(w);
}

}  // namespace expertfind
