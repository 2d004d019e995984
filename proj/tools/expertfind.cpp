// Command-line driver for the expert-finding pipeline.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "expertfind/expertfind.hpp"
#include "expertfind/remote_scorer.hpp"

namespace fs = std::filesystem;
using namespace expertfind;
using nlohmann::json;

namespace {

/// Resolved configuration: defaults, then --config file, then EXPERTFIND_*
/// environment variables, then command-line flags.
struct PipelineConfig {
    std::vector<std::string> corpus;
    std::string category = "bankruptcy";
    std::string index;
    std::string queries;
    std::string qrels;
    std::string run;
    std::string out;
    std::string out_dir = "out";
    std::string partition;
    bool lowercase = true;
    std::vector<std::string> stopwords;
    double beta = 0.0;
    std::string doc_prior = "uniform";
    double k1 = 1.2;
    double b = 0.75;
    std::size_t k = 50;
    std::uint64_t seed = 42;
    std::string scorer = "stub";
    std::string endpoint;
    std::size_t batch_size = 32;
    std::size_t max_in_flight = 1;
    long timeout_ms = 30000;
    std::string strategy = "ascent";
    int lo = 1;
    int hi = 100;
    std::vector<double> ratios{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    std::string lexicon;
    std::string negators;
    std::string intensifiers;

    [[nodiscard]] json to_json() const
    {
        return json{{"corpus", corpus},     {"category", category},   {"index", index},
                    {"queries", queries},   {"qrels", qrels},         {"run", run},
                    {"out", out},           {"out_dir", out_dir},     {"partition", partition},
                    {"lowercase", lowercase}, {"stopwords", stopwords}, {"beta", beta},
                    {"doc_prior", doc_prior}, {"k1", k1},             {"b", b},
                    {"k", k},               {"seed", seed},           {"scorer", scorer},
                    {"endpoint", endpoint}, {"batch_size", batch_size}, {"max_in_flight", max_in_flight},
                    {"timeout_ms", timeout_ms}, {"strategy", strategy}, {"lo", lo},
                    {"hi", hi},             {"ratios", ratios},       {"lexicon", lexicon},
                    {"negators", negators}, {"intensifiers", intensifiers}};
    }

    void merge_json(const json& j)
    {
        auto take = [&](const char* key, auto& field) {
            if (j.contains(key)) {
                j.at(key).get_to(field);
            }
        };
        take("corpus", corpus);
        take("category", category);
        take("index", index);
        take("queries", queries);
        take("qrels", qrels);
        take("run", run);
        take("out", out);
        take("out_dir", out_dir);
        take("partition", partition);
        take("lowercase", lowercase);
        take("stopwords", stopwords);
        take("beta", beta);
        take("doc_prior", doc_prior);
        take("k1", k1);
        take("b", b);
        take("k", k);
        take("seed", seed);
        take("scorer", scorer);
        take("endpoint", endpoint);
        take("batch_size", batch_size);
        take("max_in_flight", max_in_flight);
        take("timeout_ms", timeout_ms);
        take("strategy", strategy);
        take("lo", lo);
        take("hi", hi);
        take("ratios", ratios);
        take("lexicon", lexicon);
        take("negators", negators);
        take("intensifiers", intensifiers);
    }

    void merge_env()
    {
        auto env = [](const char* name) -> std::optional<std::string> {
            if (const char* v = std::getenv(name)) {
                return std::string(v);
            }
            return std::nullopt;
        };
        if (auto v = env("EXPERTFIND_SEED")) {
            seed = std::stoull(*v);
        }
        if (auto v = env("EXPERTFIND_K")) {
            k = std::stoul(*v);
        }
        if (auto v = env("EXPERTFIND_BETA")) {
            beta = std::stod(*v);
        }
        if (auto v = env("EXPERTFIND_SCORER")) {
            scorer = *v;
        }
        if (auto v = env("EXPERTFIND_ENDPOINT")) {
            endpoint = *v;
        }
        if (auto v = env("EXPERTFIND_CATEGORY")) {
            category = *v;
        }
    }

    void validate() const
    {
        if (k < 1) {
            throw InvalidArgument("k must be >= 1");
        }
        if (beta < 0) {
            throw InvalidArgument("beta must be > 0 (0 selects the mean answer length)");
        }
        if (scorer != "stub" && scorer != "remote") {
            throw InvalidArgument("scorer must be 'stub' or 'remote'");
        }
        if (scorer == "remote" && endpoint.empty()) {
            throw InvalidArgument("--scorer remote requires --endpoint");
        }
        if (doc_prior != "uniform" && doc_prior != "constant") {
            throw InvalidArgument("doc_prior must be 'uniform' or 'constant'");
        }
        if (strategy != "ascent" && strategy != "exhaustive") {
            throw InvalidArgument("strategy must be 'ascent' or 'exhaustive'");
        }
        if (ratios.size() != 3) {
            throw InvalidArgument("ratios needs three values");
        }
    }

    [[nodiscard]] Analyzer analyzer() const
    {
        AnalyzerOptions o;
        o.lowercase = lowercase;
        o.stopwords.insert(stopwords.begin(), stopwords.end());
        return Analyzer(std::move(o));
    }

    [[nodiscard]] PipelineOptions pipeline() const
    {
        PipelineOptions o;
        o.smoothing = SmoothingParams{beta, doc_prior == "constant" ? DocPrior::constant : DocPrior::uniform};
        o.bm25 = Bm25Params{k1, b};
        o.rerank.k = k;
        o.seed = seed;
        return o;
    }

    [[nodiscard]] SentimentScorer sentiment() const
    {
        auto lex = lexicon.empty() ? SentimentLexicon::builtin()
                                   : SentimentLexicon::load(lexicon, negators, intensifiers);
        return SentimentScorer(std::move(lex), analyzer());
    }
};

/// Flag overrides, applied after config file and environment.
struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> k;
    std::optional<double> beta;
    std::optional<std::string> scorer;
    std::optional<std::string> endpoint;
    std::optional<std::string> category;
    std::optional<double> k1;
    std::optional<double> b;
    std::optional<std::string> doc_prior;
    std::optional<std::string> strategy;
    std::optional<int> lo;
    std::optional<int> hi;
    std::optional<std::size_t> batch_size;
    std::vector<std::string> corpus;
    std::optional<std::string> index;
    std::optional<std::string> queries;
    std::optional<std::string> qrels;
    std::optional<std::string> run;
    std::optional<std::string> out;
    std::optional<std::string> out_dir;
    std::optional<std::string> partition;
    std::optional<std::string> lexicon;
    std::vector<double> ratios;
};

void add_common(CLI::App* sub, Overrides& o)
{
    sub->add_option("--config", o.config, "JSON configuration file");
    sub->add_option("--seed", o.seed, "Root random seed");
    sub->add_option("--k", o.k, "Re-rank cutoff (lawyers)");
    sub->add_option("--beta", o.beta, "Smoothing mass (0 = mean answer length)");
    sub->add_option("--scorer", o.scorer, "Pair scorer: stub | remote");
    sub->add_option("--endpoint", o.endpoint, "Scorer service base URL");
    sub->add_option("--category", o.category, "Anchor category");
    sub->add_option("--k1", o.k1, "BM25 k1");
    sub->add_option("--b", o.b, "BM25 b");
    sub->add_option("--doc-prior", o.doc_prior, "p(d|ca): uniform | constant");
    sub->add_option("--strategy", o.strategy, "Weight search: ascent | exhaustive");
    sub->add_option("--lo", o.lo, "Lowest weight");
    sub->add_option("--hi", o.hi, "Highest weight");
    sub->add_option("--batch-size", o.batch_size, "Remote scorer batch size");
    sub->add_option("--corpus", o.corpus, "Corpus files");
    sub->add_option("--index", o.index, "Index file");
    sub->add_option("--queries", o.queries, "Query file (query_id<TAB>text)");
    sub->add_option("--qrels", o.qrels, "Qrels file");
    sub->add_option("--run", o.run, "TREC run file");
    sub->add_option("--out", o.out, "Output file");
    sub->add_option("--out-dir", o.out_dir, "Output directory");
    sub->add_option("--partition", o.partition, "Expert partition file (split<TAB>lawyer)");
    sub->add_option("--lexicon", o.lexicon, "Sentiment lexicon (token<TAB>valence)");
    sub->add_option("--ratios", o.ratios, "Split ratios train validation test")->expected(3);
}

PipelineConfig resolve(const Overrides& o)
{
    PipelineConfig c;
    if (!o.config.empty()) {
        c.merge_json(with_input(o.config, [](std::istream& in) { return json::parse(in); }));
    }
    c.merge_env();
    auto set = [](auto& field, const auto& opt) {
        if (opt) {
            field = *opt;
        }
    };
    set(c.seed, o.seed);
    set(c.k, o.k);
    set(c.beta, o.beta);
    set(c.scorer, o.scorer);
    set(c.endpoint, o.endpoint);
    set(c.category, o.category);
    set(c.k1, o.k1);
    set(c.b, o.b);
    set(c.doc_prior, o.doc_prior);
    set(c.strategy, o.strategy);
    set(c.lo, o.lo);
    set(c.hi, o.hi);
    set(c.batch_size, o.batch_size);
    set(c.index, o.index);
    set(c.queries, o.queries);
    set(c.qrels, o.qrels);
    set(c.run, o.run);
    set(c.out, o.out);
    set(c.out_dir, o.out_dir);
    set(c.partition, o.partition);
    set(c.lexicon, o.lexicon);
    if (!o.corpus.empty()) {
        c.corpus = o.corpus;
    }
    if (!o.ratios.empty()) {
        c.ratios = o.ratios;
    }
    c.validate();
    return c;
}

std::string hex64(std::uint64_t v)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string file_digest(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        return "missing";
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return "fnv1a64:" + hex64(fnv1a(ss.str()));
}

/// Records config hash, seed and input/output digests next to the outputs.
class Manifest {
  public:
    Manifest(std::string command, const PipelineConfig& config) : command_(std::move(command)), config_(config) {}

    void input(const std::string& path) { inputs_.insert(path); }
    void output(const std::string& path) { outputs_.insert(path); }

    void write(const fs::path& path) const
    {
        json j;
        j["command"] = command_;
        j["config"] = config_.to_json();
        j["config_hash"] = "fnv1a64:" + hex64(fnv1a(config_.to_json().dump()));
        j["seed"] = config_.seed;
        j["inputs"] = json::object();
        for (const auto& p : inputs_) {
            j["inputs"][p] = file_digest(p);
        }
        j["outputs"] = json::object();
        for (const auto& p : outputs_) {
            j["outputs"][p] = file_digest(p);
        }
        with_output(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
    }

  private:
    std::string command_;
    const PipelineConfig& config_;
    std::set<std::string> inputs_;
    std::set<std::string> outputs_;
};

fs::path manifest_for(const std::string& out) { return out + ".manifest.json"; }

void require(const std::string& value, const char* flag)
{
    if (value.empty()) {
        throw InvalidArgument(std::string("missing required ") + flag);
    }
}

Corpus load_corpus(const PipelineConfig& c, Manifest& m)
{
    if (c.corpus.empty()) {
        throw InvalidArgument("missing required --corpus");
    }
    std::vector<fs::path> paths;
    for (const auto& p : c.corpus) {
        paths.emplace_back(p);
        m.input(p);
    }
    return ingest_corpus(paths);
}

IndexedCollection load_index(const PipelineConfig& c, Manifest& m)
{
    require(c.index, "--index");
    m.input(c.index);
    return with_input(c.index, [](std::istream& in) { return IndexedCollection::load(in); });
}

std::vector<QueryTopic> load_queries(const PipelineConfig& c, Manifest& m)
{
    require(c.queries, "--queries");
    m.input(c.queries);
    std::ifstream qin(c.queries);
    if (!qin) {
        throw Error("cannot open " + c.queries);
    }
    if (c.qrels.empty()) {
        return read_queries(qin);
    }
    m.input(c.qrels);
    std::ifstream rin(c.qrels);
    if (!rin) {
        throw Error("cannot open " + c.qrels);
    }
    return read_queries(qin, &rin);
}

std::unique_ptr<PairScorer> make_scorer(const PipelineConfig& c, const IndexedCollection& ix)
{
    if (c.scorer == "remote") {
        RemoteScorerOptions o;
        o.endpoint = c.endpoint;
        o.batch_size = c.batch_size;
        o.max_in_flight = c.max_in_flight;
        o.timeout = std::chrono::milliseconds(c.timeout_ms);
        return std::make_unique<RemoteScorer>(std::move(o));
    }
    return std::make_unique<StubScorer>(ix);
}

void write_vectors(const std::vector<ScoreVector>& vectors, std::ostream& out)
{
    for (const auto& v : vectors) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%.17g\t%.17g\t%.17g\t%.17g\t%.17g", v.s_bd, v.s_cp, v.s_pp, v.s_np, v.s_rp);
        out << v.query_id << '\t' << v.lawyer_id << '\t' << buf << '\n';
    }
}

std::vector<ScoreVector> read_vectors(std::istream& in)
{
    std::vector<ScoreVector> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ss(line);
        ScoreVector v;
        if (!(ss >> v.query_id >> v.lawyer_id >> v.s_bd >> v.s_cp >> v.s_pp >> v.s_np >> v.s_rp)) {
            throw Error("malformed score vector line: " + line);
        }
        out.push_back(std::move(v));
    }
    return out;
}

Metric parse_metric(const std::string& name)
{
    static const std::map<std::string, Metric> names{{"ap", Metric::ap}, {"map", Metric::ap}, {"rr", Metric::rr},
                                                     {"mrr", Metric::rr}, {"p1", Metric::p1}, {"p2", Metric::p2},
                                                     {"p5", Metric::p5}};
    auto it = names.find(name);
    if (it == names.end()) {
        throw InvalidArgument("unknown metric '" + name + "'");
    }
    return it->second;
}

// -- subcommands -------------------------------------------------------------

int cmd_ingest(const PipelineConfig& c)
{
    Manifest m("ingest", c);
    auto corpus = load_corpus(c, m);
    std::cout << "posts\t" << corpus.post_count() << "\nlawyers\t" << corpus.lawyers().size() << "\nanswers\t"
              << corpus.answers().size() << "\ncomments\t" << corpus.comments().size() << '\n';
    if (!c.out.empty()) {
        with_output(c.out, [&](std::ostream& out) { write_corpus(corpus, out); });
        m.output(c.out);
        m.write(manifest_for(c.out));
    }
    return 0;
}

json labels_json(const ExpertLabelSet& labels)
{
    json j;
    j["category"] = labels.category;
    j["collection_avg_acceptance_ratio"] = labels.collection_avg_acceptance_ratio;
    j["avg_best_answers_per_tag"] = labels.avg_best_answers_per_tag;
    j["experts"] = json::array();
    for (const auto& [key, value] : labels.labels) {
        if (value) {
            j["experts"].push_back({{"lawyer_id", key.first}, {"tag", key.second}});
        }
    }
    j["lawyers"] = json::object();
    for (const auto& [lawyer, s] : labels.per_lawyer_stats) {
        json tags = json::object();
        for (const auto& [tag, t] : s.per_tag) {
            tags[tag] = {t.answers, t.best};
        }
        j["lawyers"][lawyer] = {{"answers", s.answer_count}, {"best", s.best_answer_count}, {"tags", tags}};
    }
    return j;
}

int cmd_label(const PipelineConfig& c)
{
    Manifest m("label", c);
    auto corpus = load_corpus(c, m);
    auto labels = label_experts(corpus, c.category);
    const auto experts = labels.experts();
    std::size_t answers = 0;
    std::size_t best = 0;
    for (const auto& e : experts) {
        answers += labels.per_lawyer_stats.at(e).answer_count;
        best += labels.per_lawyer_stats.at(e).best_answer_count;
    }
    std::printf("experts\t%zu\nexpert_answers\t%zu\nexpert_best_answers\t%zu\ncollection_avg_acceptance_ratio\t%.6f\n",
                experts.size(), answers, best, labels.collection_avg_acceptance_ratio);
    if (!c.out.empty()) {
        with_output(c.out, [&](std::ostream& out) { out << labels_json(labels).dump(1) << '\n'; });
        m.output(c.out);
        m.write(manifest_for(c.out));
    }
    return 0;
}

int cmd_select_queries(const PipelineConfig& c)
{
    Manifest m("select-queries", c);
    auto corpus = load_corpus(c, m);
    auto labels = label_experts(corpus, c.category);
    auto queries = select_queries(corpus, labels, c.category);
    std::size_t rel = 0;
    for (const auto& q : queries) {
        rel += q.relevant_experts.size();
    }
    std::printf("queries\t%zu\nmean_experts_per_query\t%.3f\n", queries.size(),
                queries.empty() ? 0.0 : static_cast<double>(rel) / static_cast<double>(queries.size()));
    const fs::path dir = c.out_dir;
    with_output(dir / "queries.tsv", [&](std::ostream& out) { write_queries(queries, out); });
    with_output(dir / "qrels.txt", [&](std::ostream& out) { write_qrels(queries, out); });
    m.output((dir / "queries.tsv").string());
    m.output((dir / "qrels.txt").string());
    m.write(dir / "select-queries.manifest.json");
    return 0;
}

SplitTriple make_splits(const PipelineConfig& c, const std::vector<QueryTopic>& queries,
                        const ExpertLabelSet& labels, Manifest& m)
{
    if (!c.partition.empty()) {
        m.input(c.partition);
        auto assignment = with_input(c.partition, [](std::istream& in) { return read_partition(in); });
        return apply_partition(queries, assignment);
    }
    return split_by_experts(queries, labels, c.seed, SplitRatios{c.ratios[0], c.ratios[1], c.ratios[2]});
}

std::set<std::string> query_ids(const std::vector<QueryTopic>& qs)
{
    std::set<std::string> out;
    for (const auto& q : qs) {
        out.insert(q.query_id);
    }
    return out;
}

std::size_t intersection_size(const std::set<std::string>& a, const std::set<std::string>& b)
{
    std::size_t n = 0;
    for (const auto& x : a) {
        n += b.contains(x) ? 1 : 0;
    }
    return n;
}

void write_split_files(const SplitTriple& splits, const fs::path& dir, Manifest& m)
{
    with_output(dir / "partition.tsv", [&](std::ostream& out) { write_partition(splits, out); });
    m.output((dir / "partition.tsv").string());
    for (const auto& s : splits) {
        auto qpath = dir / (s.name + ".queries.tsv");
        auto rpath = dir / (s.name + ".qrels.txt");
        with_output(qpath, [&](std::ostream& out) { write_queries(s.queries, out); });
        with_output(rpath, [&](std::ostream& out) { write_qrels(s.queries, out); });
        m.output(qpath.string());
        m.output(rpath.string());
    }
}

void print_split_table(const SplitTriple& splits, std::ostream& out)
{
    out << "split\texperts\tqueries\n";
    for (const auto& s : splits) {
        out << s.name << '\t' << s.expert_ids.size() << '\t' << s.queries.size() << '\n';
    }
    const auto train = query_ids(splits[0].queries);
    out << "train_cap_validation_queries\t" << intersection_size(train, query_ids(splits[1].queries)) << '\n';
    out << "train_cap_test_queries\t" << intersection_size(train, query_ids(splits[2].queries)) << '\n';
}

int cmd_split(const PipelineConfig& c)
{
    Manifest m("split", c);
    auto corpus = load_corpus(c, m);
    auto labels = label_experts(corpus, c.category);
    auto queries = select_queries(corpus, labels, c.category);
    auto splits = make_splits(c, queries, labels, m);
    const fs::path dir = c.out_dir;
    write_split_files(splits, dir, m);
    print_split_table(splits, std::cout);
    m.write(dir / "split.manifest.json");
    return 0;
}

int cmd_index(const PipelineConfig& c)
{
    Manifest m("index", c);
    require(c.out, "--out");
    auto corpus = load_corpus(c, m);
    auto ix = IndexedCollection::build(corpus, c.analyzer());
    with_output(c.out, [&](std::ostream& out) { ix.save(out); });
    m.output(c.out);
    m.write(manifest_for(c.out));
    std::cout << "documents\t" << ix.doc_count() << "\nterms\t" << ix.terms().size() << '\n';
    return 0;
}

int cmd_stats(const PipelineConfig& c)
{
    Manifest m("stats", c);
    auto ix = load_index(c, m);
    ix.write_stats(std::cout);
    return 0;
}

int cmd_rank(const PipelineConfig& c, const std::string& model, const std::string& answers_out)
{
    Manifest m("rank " + model, c);
    require(c.out, "--out");
    auto ix = load_index(c, m);
    auto queries = load_queries(c, m);
    auto options = c.pipeline();
    SmoothingParams sp = options.smoothing;
    if (sp.beta <= 0) {
        sp.beta = default_smoothing(ix).beta;
    }
    std::vector<RankedList> runs;
    std::vector<AnswerRanking> answers;
    for (const auto& q : queries) {
        if (model == "model1") {
            runs.push_back(score_model1(q, ix, sp));
        } else if (model == "model2") {
            auto r = score_model2(q, ix, sp);
            runs.push_back(std::move(r.lawyers));
            answers.push_back(std::move(r.answers));
        } else if (model == "bm25-cand") {
            runs.push_back(score_bm25_candidates(q, ix, options.bm25));
        } else if (model == "bm25-doc") {
            auto r = score_bm25_documents(q, ix, options.bm25);
            runs.push_back(std::move(r.lawyers));
            answers.push_back(std::move(r.answers));
        } else {
            throw InvalidArgument("unknown ranker '" + model + "'");
        }
    }
    with_output(c.out, [&](std::ostream& out) { write_runs(runs, out); });
    m.output(c.out);
    if (!answers_out.empty()) {
        with_output(answers_out, [&](std::ostream& out) {
            for (const auto& a : answers) {
                std::size_t rank = 0;
                for (const auto& e : a.entries) {
                    out << a.query_id << " Q0 " << e.doc_id << ' ' << ++rank << ' ' << format_score(e.score) << ' '
                        << model << '\n';
                }
            }
        });
        m.output(answers_out);
    }
    m.write(manifest_for(c.out));
    return 0;
}

int cmd_filter_city(const PipelineConfig& c, const std::string& city)
{
    Manifest m("filter-city", c);
    require(c.run, "--run");
    require(c.out, "--out");
    auto ix = load_index(c, m);
    m.input(c.run);
    auto runs = with_input(c.run, [](std::istream& in) { return read_runs(in); });
    bool unknown = false;
    std::vector<RankedList> filtered;
    for (const auto& r : runs) {
        auto f = filter_by_city(r, city, ix);
        unknown = unknown || f.unknown_city;
        filtered.push_back(std::move(f.list));
    }
    if (unknown) {
        std::cerr << "warning: no lawyer is located in city '" << city << "'\n";
    }
    with_output(c.out, [&](std::ostream& out) { write_runs(filtered, out); });
    m.output(c.out);
    m.write(manifest_for(c.out));
    return 0;
}

int cmd_profiles(const PipelineConfig& c)
{
    Manifest m("profiles", c);
    require(c.out, "--out");
    auto corpus = load_corpus(c, m);
    auto ix = c.index.empty() ? IndexedCollection::build(corpus, c.analyzer()) : load_index(c, m);
    auto queries = load_queries(c, m);
    auto sentiment = c.sentiment();
    auto options = c.pipeline();
    with_output(c.out, [&](std::ostream& out) {
        for (const auto& q : queries) {
            auto doc_level = score_bm25_documents(q, ix, options.bm25);
            auto d_q = answers_of_top_lawyers(doc_level.lawyers, doc_level.answers, ix, options.rerank.k);
            if (d_q.entries.empty()) {
                continue;
            }
            write_profiles(build_profiles(q, d_q, corpus, sentiment, ix.analyzer(), options.seed), out);
        }
    });
    m.output(c.out);
    m.write(manifest_for(c.out));
    return 0;
}

int cmd_rerank(const PipelineConfig& c, const std::string& vectors_out)
{
    Manifest m("rerank", c);
    require(c.out, "--out");
    auto corpus = load_corpus(c, m);
    auto ix = c.index.empty() ? IndexedCollection::build(corpus, c.analyzer()) : load_index(c, m);
    auto queries = load_queries(c, m);
    auto sentiment = c.sentiment();
    auto scorer = make_scorer(c, ix);
    auto options = c.pipeline();
    std::vector<RankedList> runs;
    std::vector<ScoreVector> vectors;
    for (const auto& q : queries) {
        auto o = run_query(q, corpus, ix, sentiment, *scorer, options);
        runs.push_back(std::move(o.vbd));
        vectors.insert(vectors.end(), o.vectors.begin(), o.vectors.end());
    }
    with_output(c.out, [&](std::ostream& out) { write_runs(runs, out); });
    m.output(c.out);
    if (!vectors_out.empty()) {
        with_output(vectors_out, [&](std::ostream& out) { write_vectors(vectors, out); });
        m.output(vectors_out);
    }
    m.write(manifest_for(c.out));
    return 0;
}

SearchConfig search_config(const PipelineConfig& c)
{
    SearchConfig s;
    s.lo = c.lo;
    s.hi = c.hi;
    s.strategy = c.strategy == "exhaustive" ? SearchStrategy::exhaustive : SearchStrategy::coordinate_ascent;
    return s;
}

int cmd_tune(const PipelineConfig& c, const std::string& vectors_path)
{
    Manifest m("tune", c);
    require(c.out, "--out");
    require(vectors_path, "--vectors");
    require(c.qrels, "--qrels");
    auto queries = load_queries(c, m);
    m.input(vectors_path);
    auto vectors = with_input(vectors_path, [](std::istream& in) { return read_vectors(in); });
    DatasetSplit valid{"validation", {}, {}};
    for (auto& q : queries) {
        if (!q.relevant_experts.empty()) {
            valid.queries.push_back(std::move(q));
        }
    }
    auto result = tune_weights(valid, vectors, Metric::ap, search_config(c));
    with_output(c.out, [&](std::ostream& out) { write_weights(result, "map", out); });
    m.output(c.out);
    m.write(manifest_for(c.out));
    write_weights(result, "map", std::cout);
    return 0;
}

int cmd_evaluate(const PipelineConfig& c, const std::string& jsonl_out)
{
    Manifest m("evaluate", c);
    require(c.run, "--run");
    require(c.qrels, "--qrels");
    m.input(c.run);
    m.input(c.qrels);
    auto runs = with_input(c.run, [](std::istream& in) { return read_runs(in); });
    auto judged = with_input(c.qrels, [](std::istream& in) { return read_qrels(in); });
    std::vector<QueryTopic> qrels;
    for (auto& [q, rel] : judged) {
        qrels.push_back({q, "", std::move(rel)});
    }
    auto report = evaluate_run(runs, qrels);
    write_report_text(report, std::cout);
    if (!c.out.empty()) {
        with_output(c.out, [&](std::ostream& out) { write_report_text(report, out); });
        m.output(c.out);
    }
    if (!jsonl_out.empty()) {
        with_output(jsonl_out, [&](std::ostream& out) { write_report_jsonl(report, out); });
        m.output(jsonl_out);
    }
    if (!c.out.empty()) {
        m.write(manifest_for(c.out));
    }
    return 0;
}

int cmd_ttest(const std::string& a_path, const std::string& b_path, const std::string& metric, double alpha)
{
    auto a = with_input(a_path, [](std::istream& in) { return read_report_jsonl(in); });
    auto b = with_input(b_path, [](std::istream& in) { return read_report_jsonl(in); });
    auto [xa, xb] = paired_metric(a, b, parse_metric(metric));
    auto r = paired_ttest(xa, xb, alpha);
    std::printf("n\t%zu\nt\t%.6f\np\t%.6g\nsignificant\t%s\n", xa.size(), r.t, r.p, r.significant ? "yes" : "no");
    return 0;
}

int cmd_synth(const PipelineConfig& c, SynthConfig sc)
{
    Manifest m("synth-gen", c);
    require(c.out, "--out");
    sc.seed = c.seed;
    sc.category = c.category;
    auto generated = generate(sc);
    with_output(c.out, [&](std::ostream& out) { write_corpus(generated.corpus, out); });
    m.output(c.out);
    const auto planted = generated.planted_queries();
    const fs::path base = c.out;
    const auto qpath = base.string() + ".planted.queries.tsv";
    const auto rpath = base.string() + ".planted.qrels.txt";
    with_output(qpath, [&](std::ostream& out) { write_queries(planted, out); });
    with_output(rpath, [&](std::ostream& out) { write_qrels(planted, out); });
    m.output(qpath);
    m.output(rpath);
    m.write(manifest_for(c.out));
    std::cout << "questions\t" << generated.corpus.questions().size() << "\nanswers\t"
              << generated.corpus.answers().size() << "\nlawyers\t" << generated.corpus.lawyers().size() << '\n';
    return 0;
}

int cmd_end_to_end(const PipelineConfig& c)
{
    Manifest m("end-to-end", c);
    const fs::path dir = c.out_dir;
    auto corpus = load_corpus(c, m);
    auto labels = label_experts(corpus, c.category);
    auto queries = select_queries(corpus, labels, c.category);
    if (queries.empty()) {
        throw Error("no queries survive selection; nothing to evaluate");
    }
    auto splits = make_splits(c, queries, labels, m);
    write_split_files(splits, dir / "splits", m);
    with_output(dir / "labels.json", [&](std::ostream& out) { out << labels_json(labels).dump(1) << '\n'; });
    m.output((dir / "labels.json").string());

    auto ix = IndexedCollection::build(corpus, c.analyzer());
    with_output(dir / "index.bin", [&](std::ostream& out) { ix.save(out); });
    m.output((dir / "index.bin").string());

    auto sentiment = c.sentiment();
    auto scorer = make_scorer(c, ix);
    auto options = c.pipeline();
    const auto all_experts = labels.experts();

    struct SplitRuns {
        std::map<std::string, std::vector<RankedList>> runs;
        std::vector<QueryOutputs> outputs;
    };
    auto run_split = [&](const DatasetSplit& split) {
        std::set<std::string> excluded;
        for (const auto& e : all_experts) {
            if (!split.expert_ids.contains(e)) {
                excluded.insert(e);
            }
        }
        SplitRuns out;
        for (const auto& q : split.queries) {
            auto o = run_query(q, corpus, ix, sentiment, *scorer, options, excluded);
            out.runs[run_tags::model1_lm].push_back(o.model1);
            out.runs[run_tags::model2_lm].push_back(o.model2);
            out.runs[run_tags::model1_bm25].push_back(o.bm25_candidates);
            out.runs[run_tags::model2_bm25].push_back(o.bm25_documents);
            out.runs[vbd_run_tag].push_back(o.vbd);
            out.outputs.push_back(std::move(o));
        }
        return out;
    };

    const auto& valid = splits[1];
    const auto& test = splits[2];
    auto valid_runs = run_split(valid);
    std::vector<ScoreVector> valid_vectors;
    for (const auto& o : valid_runs.outputs) {
        valid_vectors.insert(valid_vectors.end(), o.vectors.begin(), o.vectors.end());
    }
    TuningResult tuned;
    if (!valid.queries.empty()) {
        tuned = tune_weights(valid, valid_vectors, Metric::ap, search_config(c));
    }
    with_output(dir / "weights.txt", [&](std::ostream& out) { write_weights(tuned, "map", out); });
    m.output((dir / "weights.txt").string());

    auto test_runs = run_split(test);
    for (const auto& o : test_runs.outputs) {
        test_runs.runs[aggregated_run_tag].push_back(aggregated_run(o, tuned.weights));
    }

    const std::vector<std::string> order{run_tags::model1_lm, run_tags::model1_bm25, run_tags::model2_lm,
                                         run_tags::model2_bm25, vbd_run_tag, aggregated_run_tag};
    std::map<std::string, EvalReport> reports;
    for (const auto& tag : order) {
        const auto& runs = test_runs.runs[tag];
        auto run_path = dir / "runs" / (tag + ".test.run");
        with_output(run_path, [&](std::ostream& out) { write_runs(runs, out); });
        m.output(run_path.string());
        auto report = evaluate_run(runs, test.queries);
        report.run_tag = tag;
        auto jpath = dir / "reports" / (tag + ".test.jsonl");
        with_output(jpath, [&](std::ostream& out) { write_report_jsonl(report, out); });
        m.output(jpath.string());
        reports[tag] = std::move(report);
    }

    auto write_summary = [&](std::ostream& out) {
        print_split_table(splits, out);
        const auto w = tuned.weights.as_array();
        char buf[256];
        std::snprintf(buf, sizeof buf, "weights\t%d %d %d %d %d\tvalidation_map\t%.4f\n", w[0], w[1], w[2], w[3],
                      w[4], tuned.objective);
        out << buf;
        out << "model\tMAP\tMRR\tP@1\tP@2\tP@5\tsig_vs_" << aggregated_run_tag << "\n";
        const auto& best = reports.at(aggregated_run_tag);
        for (const auto& tag : order) {
            const auto& r = reports.at(tag);
            std::string sig = "-";
            if (tag != aggregated_run_tag && r.n_queries >= 2) {
                auto [xa, xb] = paired_metric(best, r, Metric::ap);
                auto t = paired_ttest(xa, xb);
                std::snprintf(buf, sizeof buf, "p=%.4g%s", t.p, t.significant ? "*" : "");
                sig = buf;
            }
            std::snprintf(buf, sizeof buf, "%s\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%s\n", tag.c_str(), r.means.ap,
                          r.means.rr, r.means.p1, r.means.p2, r.means.p5, sig.c_str());
            out << buf;
        }
        auto su = seen_unseen_report(best, query_ids(splits[0].queries), query_ids(test.queries));
        std::snprintf(buf, sizeof buf, "seen\t%zu queries\tP@5 %.4f\nunseen\t%zu queries\tP@5 %.4f\n",
                      su.seen.n_queries, su.seen.means.p5, su.unseen.n_queries, su.unseen.means.p5);
        out << buf;
    };
    with_output(dir / "report.txt", write_summary);
    m.output((dir / "report.txt").string());
    write_summary(std::cout);
    m.write(dir / "manifest.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Expert finding for community question answering"};
    app.require_subcommand(1);
    Overrides o;

    auto* ingest = app.add_subcommand("ingest", "Validate and normalize corpus files");
    auto* label = app.add_subcommand("label", "Label experts for a category");
    auto* select = app.add_subcommand("select-queries", "Select query tags and write qrels");
    auto* split = app.add_subcommand("split", "Split experts into train/validation/test");
    auto* index = app.add_subcommand("index", "Build the answer index");
    auto* stats = app.add_subcommand("stats", "Print index statistics");
    auto* rank = app.add_subcommand("rank", "Rank lawyers with a lexical model");
    auto* filter = app.add_subcommand("filter-city", "Keep lawyers located in the asker's city");
    auto* profiles = app.add_subcommand("profiles", "Build query-dependent lawyer profiles");
    auto* rerank = app.add_subcommand("rerank", "Document-based re-ranking and profile scoring");
    auto* tune = app.add_subcommand("tune", "Grid-search aggregation weights");
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a run against qrels");
    auto* ttest = app.add_subcommand("ttest", "One-tailed paired t-test between two reports");
    auto* synth = app.add_subcommand("synth-gen", "Generate a synthetic corpus with planted experts");
    auto* e2e = app.add_subcommand("end-to-end", "Run the full pipeline");

    for (auto* sub : {ingest, label, select, split, index, stats, rank, filter, profiles, rerank, tune, evaluate,
                      synth, e2e}) {
        add_common(sub, o);
    }

    std::string model;
    std::string answers_out;
    rank->add_option("model", model, "model1 | model2 | bm25-cand | bm25-doc")
        ->required()
        ->check(CLI::IsMember({"model1", "model2", "bm25-cand", "bm25-doc"}));
    rank->add_option("--answers-out", answers_out, "Write the answer ranking (model2, bm25-doc)");

    std::string city;
    filter->add_option("--city", city, "Asker city")->required();

    std::string vectors_path;
    rerank->add_option("--vectors-out", vectors_path, "Write per-lawyer score vectors");
    tune->add_option("--vectors", vectors_path, "Score vectors from rerank");

    std::string jsonl_out;
    evaluate->add_option("--jsonl-out", jsonl_out, "Machine-readable per-query report");

    std::string a_path;
    std::string b_path;
    std::string metric = "ap";
    double alpha = 0.05;
    ttest->add_option("--a", a_path, "Report of the system expected to be better")->required();
    ttest->add_option("--b", b_path, "Baseline report")->required();
    ttest->add_option("--metric", metric, "ap | rr | p1 | p2 | p5");
    ttest->add_option("--alpha", alpha, "Significance level");

    SynthConfig sc;
    synth->add_option("--n-lawyers", sc.n_lawyers);
    synth->add_option("--n-questions", sc.n_questions);
    synth->add_option("--n-tags", sc.n_tags);
    synth->add_option("--experts-per-tag", sc.experts_per_tag);
    synth->add_option("--expert-skill", sc.expert_skill);
    synth->add_option("--noise-skill", sc.noise_skill);
    synth->add_option("--expert-answer-rate", sc.expert_answer_rate);
    synth->add_option("--comment-rate", sc.comment_rate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        auto c = resolve(o);
        if (ingest->parsed()) {
            return cmd_ingest(c);
        }
        if (label->parsed()) {
            return cmd_label(c);
        }
        if (select->parsed()) {
            return cmd_select_queries(c);
        }
        if (split->parsed()) {
            return cmd_split(c);
        }
        if (index->parsed()) {
            return cmd_index(c);
        }
        if (stats->parsed()) {
            return cmd_stats(c);
        }
        if (rank->parsed()) {
            return cmd_rank(c, model, answers_out);
        }
        if (filter->parsed()) {
            return cmd_filter_city(c, city);
        }
        if (profiles->parsed()) {
            return cmd_profiles(c);
        }
        if (rerank->parsed()) {
            return cmd_rerank(c, vectors_path);
        }
        if (tune->parsed()) {
            return cmd_tune(c, vectors_path);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(c, jsonl_out);
        }
        if (ttest->parsed()) {
            return cmd_ttest(a_path, b_path, metric, alpha);
        }
        if (synth->parsed()) {
            return cmd_synth(c, sc);
        }
        if (e2e->parsed()) {
            return cmd_end_to_end(c);
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
