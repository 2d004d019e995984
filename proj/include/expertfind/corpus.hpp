#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "random.hpp"

namespace expertfind {

/// UTC seconds.
using Timestamp = std::int64_t;

struct Question {
    std::string id;
    std::string text;
    std::string category;
    std::vector<std::string> tags;  // sorted, unique
    std::string city;
    std::string state;
    Timestamp timestamp = 0;
};

struct Answer {
    std::string id;
    std::string question_id;
    std::string lawyer_id;
    std::string text;
    bool is_best = false;
    Timestamp timestamp = 0;
};

struct Comment {
    std::string id;
    std::string answer_id;
    std::string text;
    Timestamp timestamp = 0;
};

struct LawyerRef {
    std::string lawyer_id;
    std::string city;
    std::string state;
};

/// Immutable, cross-referenced community QA corpus. Records are ordered by
/// (timestamp, id); lawyers by id.
class Corpus {
  public:
    Corpus() = default;

    /// Validates and indexes the given records. Throws IngestError on
    /// duplicate ids, dangling references or violated record invariants.
    static Corpus build(std::vector<Question> questions, std::vector<Answer> answers,
                        std::vector<Comment> comments, std::vector<LawyerRef> lawyers)
    {
        Corpus c;
        c.questions_ = std::move(questions);
        c.answers_ = std::move(answers);
        c.comments_ = std::move(comments);
        c.lawyers_ = std::move(lawyers);

        auto by_time = [](const auto& a, const auto& b) {
            return std::tie(a.timestamp, a.id) < std::tie(b.timestamp, b.id);
        };
        std::stable_sort(c.questions_.begin(), c.questions_.end(), by_time);
        std::stable_sort(c.answers_.begin(), c.answers_.end(), by_time);
        std::stable_sort(c.comments_.begin(), c.comments_.end(), by_time);
        std::stable_sort(c.lawyers_.begin(), c.lawyers_.end(),
                         [](const auto& a, const auto& b) { return a.lawyer_id < b.lawyer_id; });

        for (std::size_t i = 0; i < c.lawyers_.size(); ++i) {
            const auto& l = c.lawyers_[i];
            if (l.lawyer_id.empty()) {
                throw IngestError("lawyer record with empty lawyer_id");
            }
            if (!c.lawyer_index_.emplace(l.lawyer_id, i).second) {
                throw IngestError("duplicate lawyer id '" + l.lawyer_id + "'");
            }
        }
        for (std::size_t i = 0; i < c.questions_.size(); ++i) {
            auto& q = c.questions_[i];
            std::sort(q.tags.begin(), q.tags.end());
            q.tags.erase(std::unique(q.tags.begin(), q.tags.end()), q.tags.end());
            if (q.tags.empty()) {
                throw IngestError("question '" + q.id + "' has no tags");
            }
            if (q.timestamp <= 0) {
                throw IngestError("question '" + q.id + "' has non-positive timestamp");
            }
            if (!c.question_index_.emplace(q.id, i).second) {
                throw IngestError("duplicate question id '" + q.id + "'");
            }
        }
        c.answers_of_question_.resize(c.questions_.size());
        c.answers_of_lawyer_.resize(c.lawyers_.size());
        for (std::size_t i = 0; i < c.answers_.size(); ++i) {
            const auto& a = c.answers_[i];
            if (!c.answer_index_.emplace(a.id, i).second) {
                throw IngestError("duplicate answer id '" + a.id + "'");
            }
            auto q = c.question_index_.find(a.question_id);
            if (q == c.question_index_.end()) {
                throw IngestError("answer '" + a.id + "' references unknown question '" + a.question_id + "'");
            }
            auto l = c.lawyer_index_.find(a.lawyer_id);
            if (l == c.lawyer_index_.end()) {
                throw IngestError("answer '" + a.id + "' references unknown lawyer '" + a.lawyer_id + "'");
            }
            if (a.text.find_first_not_of(" \t\r\n\v\f") == std::string::npos) {
                throw IngestError("answer '" + a.id + "' has empty text");
            }
            c.answers_of_question_[q->second].push_back(i);
            c.answers_of_lawyer_[l->second].push_back(i);
        }
        c.comments_of_answer_.resize(c.answers_.size());
        for (std::size_t i = 0; i < c.comments_.size(); ++i) {
            const auto& cm = c.comments_[i];
            if (!c.comment_index_.emplace(cm.id, i).second) {
                throw IngestError("duplicate comment id '" + cm.id + "'");
            }
            auto a = c.answer_index_.find(cm.answer_id);
            if (a == c.answer_index_.end()) {
                throw IngestError("comment '" + cm.id + "' references unknown answer '" + cm.answer_id + "'");
            }
            c.comments_of_answer_[a->second].push_back(i);
        }
        return c;
    }

    [[nodiscard]] const std::vector<Question>& questions() const noexcept { return questions_; }
    [[nodiscard]] const std::vector<Answer>& answers() const noexcept { return answers_; }
    [[nodiscard]] const std::vector<Comment>& comments() const noexcept { return comments_; }
    [[nodiscard]] const std::vector<LawyerRef>& lawyers() const noexcept { return lawyers_; }

    /// Posts are question threads.
    [[nodiscard]] std::size_t post_count() const noexcept { return questions_.size(); }

    [[nodiscard]] const Question* find_question(std::string_view id) const
    {
        return lookup(question_index_, questions_, id);
    }
    [[nodiscard]] const Answer* find_answer(std::string_view id) const { return lookup(answer_index_, answers_, id); }
    [[nodiscard]] const LawyerRef* find_lawyer(std::string_view id) const
    {
        return lookup(lawyer_index_, lawyers_, id);
    }

    [[nodiscard]] std::size_t answer_position(std::string_view id) const
    {
        return answer_index_.at(std::string(id));
    }

    [[nodiscard]] const Question& question_of(const Answer& a) const
    {
        return questions_[question_index_.at(a.question_id)];
    }

    /// Comment positions attached to the answer at `answer_pos`, in corpus order.
    [[nodiscard]] const std::vector<std::size_t>& comments_of(std::size_t answer_pos) const
    {
        return comments_of_answer_.at(answer_pos);
    }

    /// Answer positions written by the lawyer, in corpus order.
    [[nodiscard]] const std::vector<std::size_t>& answers_of_lawyer(std::string_view lawyer_id) const
    {
        static const std::vector<std::size_t> none;
        auto it = lawyer_index_.find(std::string(lawyer_id));
        return it == lawyer_index_.end() ? none : answers_of_lawyer_[it->second];
    }

    [[nodiscard]] const std::vector<std::size_t>& answers_of_question(std::size_t question_pos) const
    {
        return answers_of_question_.at(question_pos);
    }

    [[nodiscard]] bool has_category(std::string_view category) const
    {
        return std::any_of(questions_.begin(), questions_.end(),
                           [&](const Question& q) { return q.category == category; });
    }

  private:
    template <typename Index, typename Vec>
    static auto lookup(const Index& index, const Vec& vec, std::string_view id) -> const typename Vec::value_type*
    {
        auto it = index.find(std::string(id));
        return it == index.end() ? nullptr : &vec[it->second];
    }

    std::vector<Question> questions_;
    std::vector<Answer> answers_;
    std::vector<Comment> comments_;
    std::vector<LawyerRef> lawyers_;
    std::unordered_map<std::string, std::size_t> question_index_;
    std::unordered_map<std::string, std::size_t> answer_index_;
    std::unordered_map<std::string, std::size_t> comment_index_;
    std::unordered_map<std::string, std::size_t> lawyer_index_;
    std::vector<std::vector<std::size_t>> answers_of_question_;
    std::vector<std::vector<std::size_t>> answers_of_lawyer_;
    std::vector<std::vector<std::size_t>> comments_of_answer_;
};

// ---------------------------------------------------------------------------
// Line-delimited JSON serialization. One object per line, `kind` selects the
// record type.

namespace detail {

template <typename T>
T required(const nlohmann::json& j, const char* field)
{
    auto it = j.find(field);
    if (it == j.end()) {
        throw IngestError(std::string("missing field '") + field + "'");
    }
    return it->get<T>();
}

template <typename T>
T optional_field(const nlohmann::json& j, const char* field, T fallback)
{
    auto it = j.find(field);
    return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

}  // namespace detail

struct RecordBatch {
    std::vector<Question> questions;
    std::vector<Answer> answers;
    std::vector<Comment> comments;
    std::vector<LawyerRef> lawyers;
};

/// Parses one JSON line into `batch`. Throws IngestError / json errors.
inline void parse_record(std::string_view line, RecordBatch& batch)
{
    using detail::optional_field;
    using detail::required;
    auto j = nlohmann::json::parse(line);
    if (!j.is_object()) {
        throw IngestError("record is not an object");
    }
    auto kind = required<std::string>(j, "kind");
    if (kind == "question") {
        Question q;
        q.id = required<std::string>(j, "id");
        q.text = optional_field<std::string>(j, "text", "");
        q.category = required<std::string>(j, "category");
        q.tags = required<std::vector<std::string>>(j, "tags");
        q.city = optional_field<std::string>(j, "city", "");
        q.state = optional_field<std::string>(j, "state", "");
        q.timestamp = required<Timestamp>(j, "timestamp");
        batch.questions.push_back(std::move(q));
    } else if (kind == "answer") {
        Answer a;
        a.id = required<std::string>(j, "id");
        a.question_id = required<std::string>(j, "question_id");
        a.lawyer_id = required<std::string>(j, "lawyer_id");
        a.text = required<std::string>(j, "text");
        a.is_best = optional_field<bool>(j, "is_best", false);
        a.timestamp = optional_field<Timestamp>(j, "timestamp", 0);
        batch.answers.push_back(std::move(a));
    } else if (kind == "comment") {
        Comment c;
        c.id = required<std::string>(j, "id");
        c.answer_id = required<std::string>(j, "answer_id");
        c.text = optional_field<std::string>(j, "text", "");
        c.timestamp = optional_field<Timestamp>(j, "timestamp", 0);
        batch.comments.push_back(std::move(c));
    } else if (kind == "lawyer") {
        LawyerRef l;
        l.lawyer_id = required<std::string>(j, "lawyer_id");
        l.city = optional_field<std::string>(j, "city", "");
        l.state = optional_field<std::string>(j, "state", "");
        batch.lawyers.push_back(std::move(l));
    } else {
        throw IngestError("unknown kind '" + kind + "'");
    }
}

/// Reads every file (blank lines are skipped) and builds the corpus.
inline Corpus ingest_corpus(const std::vector<std::filesystem::path>& paths)
{
    RecordBatch batch;
    for (const auto& path : paths) {
        std::ifstream in(path);
        if (!in) {
            throw IngestError("cannot open corpus file " + path.string());
        }
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                continue;
            }
            try {
                parse_record(line, batch);
            } catch (const std::exception& e) {
                throw IngestError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
    }
    return Corpus::build(std::move(batch.questions), std::move(batch.answers), std::move(batch.comments),
                         std::move(batch.lawyers));
}

/// Canonical serialization: lawyers, questions, answers, comments, each in
/// corpus order, keys sorted.
inline void write_corpus(const Corpus& corpus, std::ostream& out)
{
    for (const auto& l : corpus.lawyers()) {
        nlohmann::json j{{"kind", "lawyer"}, {"lawyer_id", l.lawyer_id}, {"city", l.city}, {"state", l.state}};
        out << j.dump() << '\n';
    }
    for (const auto& q : corpus.questions()) {
        nlohmann::json j{{"kind", "question"}, {"id", q.id},     {"text", q.text},   {"category", q.category},
                         {"tags", q.tags},     {"city", q.city}, {"state", q.state}, {"timestamp", q.timestamp}};
        out << j.dump() << '\n';
    }
    for (const auto& a : corpus.answers()) {
        nlohmann::json j{{"kind", "answer"},       {"id", a.id},     {"question_id", a.question_id},
                         {"lawyer_id", a.lawyer_id}, {"text", a.text}, {"is_best", a.is_best},
                         {"timestamp", a.timestamp}};
        out << j.dump() << '\n';
    }
    for (const auto& c : corpus.comments()) {
        nlohmann::json j{{"kind", "comment"}, {"id", c.id}, {"answer_id", c.answer_id}, {"text", c.text},
                         {"timestamp", c.timestamp}};
        out << j.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Ground-truth expert labeling.

struct TagCounts {
    std::size_t answers = 0;
    std::size_t best = 0;
};

struct LawyerStats {
    std::size_t answer_count = 0;       // within the labeled category
    std::size_t best_answer_count = 0;  // within the labeled category
    std::map<std::string, TagCounts> per_category;
    std::map<std::string, TagCounts> per_tag;  // tags of the labeled category's questions

    [[nodiscard]] double acceptance_ratio() const
    {
        return answer_count == 0 ? 0.0 : static_cast<double>(best_answer_count) / static_cast<double>(answer_count);
    }
};

struct LabelingOptions {
    std::size_t min_best_answers = 10;
    /// Condition on the tag average: strictly greater when true, >= otherwise.
    bool strict_tag_average = true;
};

struct ExpertLabelSet {
    std::string category;
    LabelingOptions options;
    /// One entry per (lawyer, tag) pair where the lawyer answered at least
    /// once on the tag. Missing pairs are non-experts.
    std::map<std::pair<std::string, std::string>, bool> labels;
    std::map<std::string, double> avg_best_answers_per_tag;
    double collection_avg_acceptance_ratio = 0.0;
    std::map<std::string, LawyerStats> per_lawyer_stats;

    [[nodiscard]] bool is_expert(const std::string& lawyer_id, const std::string& tag) const
    {
        auto it = labels.find({lawyer_id, tag});
        return it != labels.end() && it->second;
    }

    /// Lawyers labeled expert on at least one tag.
    [[nodiscard]] std::set<std::string> experts() const
    {
        std::set<std::string> out;
        for (const auto& [key, value] : labels) {
            if (value) {
                out.insert(key.first);
            }
        }
        return out;
    }

    [[nodiscard]] std::set<std::string> experts_on(const std::string& tag) const
    {
        std::set<std::string> out;
        for (const auto& [key, value] : labels) {
            if (value && key.second == tag) {
                out.insert(key.first);
            }
        }
        return out;
    }
};

/// Labels (lawyer, tag) pairs of `category` as expert when the lawyer has at
/// least `min_best_answers` best answers in the category, more best answers on
/// the tag than the mean over lawyers active on that tag, and an acceptance
/// ratio in the category above the mean ratio of lawyers active in it.
inline ExpertLabelSet label_experts(const Corpus& corpus, const std::string& category,
                                    LabelingOptions options = {})
{
    ExpertLabelSet out;
    out.category = category;
    out.options = options;

    std::size_t in_category = 0;
    for (const auto& a : corpus.answers()) {
        const auto& q = corpus.question_of(a);
        auto& stats = out.per_lawyer_stats[a.lawyer_id];
        auto& cat = stats.per_category[q.category];
        ++cat.answers;
        cat.best += a.is_best ? 1 : 0;
        if (q.category != category) {
            continue;
        }
        ++in_category;
        ++stats.answer_count;
        stats.best_answer_count += a.is_best ? 1 : 0;
        for (const auto& tag : q.tags) {
            auto& t = stats.per_tag[tag];
            ++t.answers;
            t.best += a.is_best ? 1 : 0;
        }
    }
    if (in_category == 0) {
        throw InvalidArgument("category '" + category + "' has no answers");
    }

    std::map<std::string, std::pair<double, std::size_t>> tag_sums;
    double ratio_sum = 0.0;
    std::size_t active = 0;
    for (const auto& [lawyer, stats] : out.per_lawyer_stats) {
        if (stats.answer_count == 0) {
            continue;
        }
        ratio_sum += stats.acceptance_ratio();
        ++active;
        for (const auto& [tag, counts] : stats.per_tag) {
            auto& s = tag_sums[tag];
            s.first += static_cast<double>(counts.best);
            ++s.second;
        }
    }
    out.collection_avg_acceptance_ratio = ratio_sum / static_cast<double>(active);
    for (const auto& [tag, s] : tag_sums) {
        out.avg_best_answers_per_tag[tag] = s.first / static_cast<double>(s.second);
    }

    for (const auto& [lawyer, stats] : out.per_lawyer_stats) {
        const bool engaged = stats.best_answer_count >= options.min_best_answers;
        const bool accepted = stats.acceptance_ratio() > out.collection_avg_acceptance_ratio;
        for (const auto& [tag, counts] : stats.per_tag) {
            const double avg = out.avg_best_answers_per_tag[tag];
            const double best = static_cast<double>(counts.best);
            const bool above_tag_avg = options.strict_tag_average ? best > avg : best >= avg;
            out.labels[{lawyer, tag}] = engaged && above_tag_avg && accepted;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Queries and splits.

struct QueryTopic {
    std::string query_id;
    std::string tag_text;
    std::set<std::string> relevant_experts;
};

struct QuerySelectionOptions {
    double top_fraction = 0.2;
    std::size_t min_experts = 2;
};

/// Number of questions of `category` carrying each tag.
inline std::map<std::string, std::size_t> tag_cooccurrence(const Corpus& corpus, std::string_view category)
{
    std::map<std::string, std::size_t> counts;
    for (const auto& q : corpus.questions()) {
        if (q.category != category) {
            continue;
        }
        for (const auto& tag : q.tags) {
            ++counts[tag];
        }
    }
    return counts;
}

/// Keeps the top fraction (ceiling, ties at the boundary included) of tags
/// co-occurring with the anchor category, then those with enough experts.
/// Query ids are assigned in co-occurrence order.
inline std::vector<QueryTopic> select_queries(const Corpus& corpus, const ExpertLabelSet& labels,
                                              std::string_view anchor_category, QuerySelectionOptions options = {})
{
    auto counts = tag_cooccurrence(corpus, anchor_category);
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    std::vector<QueryTopic> out;
    if (ranked.empty()) {
        return out;
    }
    auto keep = static_cast<std::size_t>(std::ceil(options.top_fraction * static_cast<double>(ranked.size()) - 1e-9));
    keep = std::clamp<std::size_t>(keep, 1, ranked.size());
    const std::size_t boundary = ranked[keep - 1].second;

    for (const auto& [tag, count] : ranked) {
        if (count < boundary) {
            break;
        }
        auto experts = labels.experts_on(tag);
        if (experts.size() < options.min_experts) {
            continue;
        }
        char id[16];
        std::snprintf(id, sizeof id, "Q%03zu", out.size() + 1);
        out.push_back({id, tag, std::move(experts)});
    }
    return out;
}

struct DatasetSplit {
    std::string name;
    std::set<std::string> expert_ids;
    std::vector<QueryTopic> queries;
};

using SplitTriple = std::array<DatasetSplit, 3>;

inline constexpr std::array<std::string_view, 3> split_names{"train", "validation", "test"};

struct SplitRatios {
    double train = 1.0 / 3.0;
    double validation = 1.0 / 3.0;
    double test = 1.0 / 3.0;
};

/// Restricts each query to the split's experts; queries with no expert left
/// are dropped.
inline std::vector<QueryTopic> restrict_queries(const std::vector<QueryTopic>& queries,
                                                const std::set<std::string>& experts)
{
    std::vector<QueryTopic> out;
    for (const auto& q : queries) {
        QueryTopic r{q.query_id, q.tag_text, {}};
        std::set_intersection(q.relevant_experts.begin(), q.relevant_experts.end(), experts.begin(), experts.end(),
                              std::inserter(r.relevant_experts, r.relevant_experts.end()));
        if (!r.relevant_experts.empty()) {
            out.push_back(std::move(r));
        }
    }
    return out;
}

/// Builds the three splits from an explicit lawyer -> split-name assignment.
inline SplitTriple apply_partition(const std::vector<QueryTopic>& queries,
                                   const std::map<std::string, std::string>& assignment)
{
    SplitTriple splits;
    for (std::size_t i = 0; i < 3; ++i) {
        splits[i].name = split_names[i];
    }
    for (const auto& [lawyer, name] : assignment) {
        auto it = std::find(split_names.begin(), split_names.end(), name);
        if (it == split_names.end()) {
            throw InvalidArgument("unknown split name '" + name + "'");
        }
        splits[static_cast<std::size_t>(it - split_names.begin())].expert_ids.insert(lawyer);
    }
    for (auto& s : splits) {
        s.queries = restrict_queries(queries, s.expert_ids);
    }
    return splits;
}

/// Seeded partition of all labeled experts into train/validation/test.
inline SplitTriple split_by_experts(const std::vector<QueryTopic>& queries, const ExpertLabelSet& labels,
                                    std::uint64_t seed, SplitRatios ratios = {})
{
    if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9 || ratios.train < 0
        || ratios.validation < 0 || ratios.test < 0) {
        throw InvalidArgument("split ratios must be non-negative and sum to 1");
    }
    auto expert_set = labels.experts();
    std::vector<std::string> experts(expert_set.begin(), expert_set.end());
    if (experts.size() < 3) {
        throw InvalidArgument("need at least 3 experts to split, got " + std::to_string(experts.size()));
    }
    Rng rng(derive_seed(seed, "split_by_experts"));
    shuffle(std::span(experts), rng);

    const auto n = static_cast<double>(experts.size());
    auto n_train = static_cast<std::size_t>(std::llround(ratios.train * n));
    auto n_valid = static_cast<std::size_t>(std::llround(ratios.validation * n));
    n_train = std::min(n_train, experts.size());
    n_valid = std::min(n_valid, experts.size() - n_train);

    std::map<std::string, std::string> assignment;
    for (std::size_t i = 0; i < experts.size(); ++i) {
        std::size_t which = i < n_train ? 0 : (i < n_train + n_valid ? 1 : 2);
        assignment[experts[i]] = std::string(split_names[which]);
    }
    return apply_partition(queries, assignment);
}

}  // namespace expertfind
