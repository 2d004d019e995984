#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "fixtures.hpp"

using namespace expertfind;
using namespace fixture;
using nlohmann::json;

namespace {

/// Runs the CLI through the shell with stdout and stderr captured.
struct Cli {
    TempDir& dir;
    std::string out;
    std::string err;

    int operator()(const std::string& args, const std::string& env = "")
    {
        const auto o = dir / "stdout.txt";
        const auto e = dir / "stderr.txt";
        const std::string cmd = "cd '" + dir.path().string() + "' && " + env + " '" + EXPERTFIND_CLI + "' " + args
                                + " >'" + o.string() + "' 2>'" + e.string() + "'";
        const int status = std::system(cmd.c_str());
        out = slurp(o);
        err = slurp(e);
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }
};

json read_json(const std::filesystem::path& p)
{
    return json::parse(slurp(p));
}

}  // namespace

TEST_CASE("usage errors exit with status 2")
{
    TempDir dir("cli");
    Cli cli{dir, {}, {}};
    CHECK(cli("frobnicate") == 2);
    CHECK(cli("") == 2);
    CHECK(cli("evaluate --no-such-flag 1") == 2);
    CHECK(cli("rank model2 --k 0 --out x.run") == 2);
    CHECK_THAT(cli.err, Catch::Matchers::ContainsSubstring("k must be >= 1"));
    CHECK(cli("rank model9 --out x.run") == 2);
    CHECK(cli("end-to-end --scorer remote") == 2);
    CHECK(cli("--help") == 0);
}

TEST_CASE("evaluate reports P@1 of one when every query ranks a relevant lawyer first")
{
    TempDir dir("cli");
    {
        std::ofstream run(dir / "run.txt");
        run << "q1 Q0 A 1 3.0 t\nq1 Q0 B 2 2.0 t\nq2 Q0 C 1 1.5 t\nq2 Q0 A 2 1.0 t\n";
        std::ofstream qrels(dir / "qrels.txt");
        qrels << "q1 0 A 1\nq2 0 C 1\nq2 0 B 1\n";
    }
    Cli cli{dir, {}, {}};
    REQUIRE(cli("evaluate --run run.txt --qrels qrels.txt --out report.txt --jsonl-out report.jsonl") == 0);
    CHECK_THAT(cli.out, Catch::Matchers::ContainsSubstring("P_1\tall\t1.0000"));
    CHECK_THAT(cli.out, Catch::Matchers::ContainsSubstring("num_q\tall\t2"));
    CHECK(slurp(dir / "report.txt") == cli.out);
    CHECK(std::filesystem::exists(dir / "report.txt.manifest.json"));
    std::ifstream jsonl(dir / "report.jsonl");
    const auto report = read_report_jsonl(jsonl);
    CHECK(report.per_query.at("q2").ap == 0.5);

    // A run query with no judgments is an error, not a silent zero.
    {
        std::ofstream run(dir / "run2.txt");
        run << "q3 Q0 A 1 1.0 t\n";
    }
    CHECK(cli("evaluate --run run2.txt --qrels qrels.txt") == 2);
    CHECK_THAT(cli.err, Catch::Matchers::ContainsSubstring("q3"));
}

TEST_CASE("ranking twice with the same config gives identical files")
{
    TempDir dir("cli");
    Cli cli{dir, {}, {}};
    REQUIRE(cli("synth-gen --out corpus.jsonl --seed 3 --n-lawyers 50 --n-questions 120") == 0);
    REQUIRE(cli("index --corpus corpus.jsonl --out index.bin") == 0);
    const std::string q = "--index index.bin --queries corpus.jsonl.planted.queries.tsv";
    REQUIRE(cli("rank model2 " + q + " --out a.run") == 0);
    REQUIRE(cli("rank model2 " + q + " --out b.run") == 0);
    const auto a = slurp(dir / "a.run");
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "b.run"));
    // Manifests differ only in the output path they name.
    auto ma = read_json(dir / "a.run.manifest.json");
    auto mb = read_json(dir / "b.run.manifest.json");
    CHECK(ma.at("outputs").begin().value() == mb.at("outputs").begin().value());
    CHECK(ma.at("inputs") == mb.at("inputs"));
    ma["config"].erase("out");
    mb["config"].erase("out");
    CHECK(ma.at("config") == mb.at("config"));

    // The run file matches the library ranker.
    std::ifstream ix_in(dir / "index.bin", std::ios::binary);
    const auto ix = IndexedCollection::load(ix_in);
    std::ifstream qin(dir / "corpus.jsonl.planted.queries.tsv");
    std::vector<RankedList> direct;
    for (const auto& query : read_queries(qin)) {
        direct.push_back(score_model2(query, ix, default_smoothing(ix)).lawyers);
    }
    std::ostringstream expected;
    write_runs(direct, expected);
    CHECK(a == expected.str());
}

TEST_CASE("end-to-end writes every stage and is reproducible")
{
    TempDir dir("cli");
    Cli cli{dir, {}, {}};
    REQUIRE(cli("synth-gen --out corpus.jsonl --seed 7 --n-lawyers 60 --n-questions 400") == 0);
    REQUIRE(cli("end-to-end --corpus corpus.jsonl --out-dir e2e --seed 7 --k 10") == 0);
    const auto e2e = dir / "e2e";
    const std::vector<std::string> tags{"model1-lm", "model1-bm25", "model2-lm", "model2-bm25", "vbd",
                                        "vbd-profiles"};
    for (const auto& t : tags) {
        INFO(t);
        CHECK(std::filesystem::exists(e2e / "runs" / (t + ".test.run")));
        CHECK(std::filesystem::exists(e2e / "reports" / (t + ".test.jsonl")));
    }
    for (const auto* f : {"weights.txt", "report.txt", "manifest.json", "labels.json", "index.bin",
                          "splits/partition.tsv", "splits/test.qrels.txt"}) {
        CHECK(std::filesystem::exists(e2e / f));
    }
    const std::string summary = cli.out;
    CHECK(slurp(e2e / "report.txt") == summary);

    std::ifstream win(e2e / "weights.txt");
    const auto w = read_weights(win);
    for (int x : w.as_array()) {
        CHECK(x >= 1);
        CHECK(x <= 100);
    }

    // Each stored report equals a standalone evaluation of the stored run.
    for (const auto& t : tags) {
        const auto run = "e2e/runs/" + t + ".test.run";
        REQUIRE(cli("evaluate --run " + run + " --qrels e2e/splits/test.qrels.txt --jsonl-out " + t + ".jsonl") == 0);
        std::ifstream a(dir / (t + ".jsonl"));
        std::ifstream b(e2e / "reports" / (t + ".test.jsonl"));
        INFO(t);
        CHECK(read_report_jsonl(a).per_query == read_report_jsonl(b).per_query);
    }

    // A rerun into the same directory rewrites identical bytes, manifest included.
    const auto manifest = slurp(e2e / "manifest.json");
    std::map<std::string, std::string> before;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(e2e)) {
        if (entry.is_regular_file()) {
            before[entry.path().string()] = slurp(entry.path());
        }
    }
    REQUIRE(cli("end-to-end --corpus corpus.jsonl --out-dir e2e --seed 7 --k 10") == 0);
    CHECK(cli.out == summary);
    for (const auto& [path, bytes] : before) {
        INFO(path);
        CHECK(slurp(path) == bytes);
    }
    const auto m = json::parse(manifest);
    CHECK(m.at("seed") == 7);
    CHECK(m.at("outputs").size() >= 2 * tags.size() + 3);
}

TEST_CASE("config file, environment and flags are layered")
{
    TempDir dir("cli");
    Cli cli{dir, {}, {}};
    REQUIRE(cli("synth-gen --out corpus.jsonl --seed 3 --n-lawyers 50 --n-questions 60") == 0);
    REQUIRE(cli("index --corpus corpus.jsonl --out index.bin") == 0);
    {
        std::ofstream cfg(dir / "cfg.json");
        cfg << R"({"seed": 9, "k": 7, "beta": 25.0})";
    }
    const std::string base = "rank model1 --index index.bin --queries corpus.jsonl.planted.queries.tsv ";
    REQUIRE(cli(base + "--config cfg.json --out a.run") == 0);
    auto m = read_json(dir / "a.run.manifest.json");
    CHECK(m.at("seed") == 9);
    CHECK(m.at("config").at("k") == 7);
    CHECK(m.at("config").at("beta") == 25.0);

    REQUIRE(cli(base + "--config cfg.json --out b.run", "EXPERTFIND_SEED=11 EXPERTFIND_BETA=5") == 0);
    m = read_json(dir / "b.run.manifest.json");
    CHECK(m.at("seed") == 11);
    CHECK(m.at("config").at("beta") == 5.0);
    CHECK(m.at("config").at("k") == 7);

    REQUIRE(cli(base + "--config cfg.json --seed 13 --out c.run", "EXPERTFIND_SEED=11") == 0);
    CHECK(read_json(dir / "c.run.manifest.json").at("seed") == 13);

    // Beta changes Model 1 scores, so the runs differ.
    CHECK(slurp(dir / "a.run") != slurp(dir / "b.run"));
    CHECK(m.at("config_hash") != read_json(dir / "a.run.manifest.json").at("config_hash"));

    CHECK(cli(base + "--out d.run", "EXPERTFIND_K=0") == 2);
    CHECK(cli(base + "--config missing.json --out e.run") != 0);
}
