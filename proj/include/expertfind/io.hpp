#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "rankers.hpp"

namespace expertfind {

// TREC run lines: `query_id Q0 lawyer_id rank score run_tag`.

inline std::string format_score(double score)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", score);
    return buf;
}

inline void write_run(const RankedList& run, std::ostream& out)
{
    std::size_t rank = 0;
    for (const auto& e : run.entries) {
        out << run.query_id << " Q0 " << e.lawyer_id << ' ' << ++rank << ' ' << format_score(e.score) << ' '
            << run.run_tag << '\n';
    }
}

inline void write_runs(const std::vector<RankedList>& runs, std::ostream& out)
{
    for (const auto& r : runs) {
        write_run(r, out);
    }
}

/// Groups lines by query in order of first appearance; entries keep file order.
inline std::vector<RankedList> read_runs(std::istream& in)
{
    std::vector<RankedList> runs;
    std::map<std::string, std::size_t> slot;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string qid, q0, lawyer, tag;
        std::size_t rank = 0;
        double score = 0.0;
        if (!(ss >> qid)) {
            continue;
        }
        if (!(ss >> q0 >> lawyer >> rank >> score >> tag)) {
            throw Error("run line " + std::to_string(lineno) + ": expected 6 columns");
        }
        auto [it, fresh] = slot.emplace(qid, runs.size());
        if (fresh) {
            runs.push_back({qid, {}, tag});
        }
        runs[it->second].entries.push_back({lawyer, score});
    }
    return runs;
}

// Qrels lines: `query_id 0 lawyer_id 1`.

inline void write_qrels(const std::vector<QueryTopic>& queries, std::ostream& out)
{
    for (const auto& q : queries) {
        for (const auto& l : q.relevant_experts) {
            out << q.query_id << " 0 " << l << " 1\n";
        }
    }
}

/// Relevant lawyers per query (judgments with relevance <= 0 are dropped).
inline std::map<std::string, std::set<std::string>> read_qrels(std::istream& in)
{
    std::map<std::string, std::set<std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string qid, iter, lawyer;
        int rel = 0;
        if (!(ss >> qid)) {
            continue;
        }
        if (!(ss >> iter >> lawyer >> rel)) {
            throw Error("qrels line " + std::to_string(lineno) + ": expected 4 columns");
        }
        auto& set = out[qid];
        if (rel > 0) {
            set.insert(lawyer);
        }
    }
    return out;
}

// Query files: `query_id<TAB>tag_text`.

inline void write_queries(const std::vector<QueryTopic>& queries, std::ostream& out)
{
    for (const auto& q : queries) {
        out << q.query_id << '\t' << q.tag_text << '\n';
    }
}

/// Joins a query file with qrels. Queries without judgments get an empty set.
inline std::vector<QueryTopic> read_queries(std::istream& queries, std::istream* qrels = nullptr)
{
    std::map<std::string, std::set<std::string>> judged;
    if (qrels != nullptr) {
        judged = read_qrels(*qrels);
    }
    std::vector<QueryTopic> out;
    std::string line;
    while (std::getline(queries, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw Error("query line without tab: " + line);
        }
        QueryTopic q{line.substr(0, tab), line.substr(tab + 1), {}};
        if (auto it = judged.find(q.query_id); it != judged.end()) {
            q.relevant_experts = it->second;
        }
        out.push_back(std::move(q));
    }
    return out;
}

// Split files: `split_name<TAB>lawyer_id`.

inline void write_partition(const SplitTriple& splits, std::ostream& out)
{
    for (const auto& s : splits) {
        for (const auto& l : s.expert_ids) {
            out << s.name << '\t' << l << '\n';
        }
    }
}

inline std::map<std::string, std::string> read_partition(std::istream& in)
{
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw Error("split line without tab: " + line);
        }
        out[line.substr(tab + 1)] = line.substr(0, tab);
    }
    return out;
}

template <typename Fn>
void with_output(const std::filesystem::path& path, Fn&& fn)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    fn(out);
    if (!out) {
        throw Error("failed writing " + path.string());
    }
}

template <typename Fn>
auto with_input(const std::filesystem::path& path, Fn&& fn)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return fn(in);
}

}  // namespace expertfind
