#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "firmgraph/cli/commands.hpp"
#include "firmgraph/logic/parser.hpp"
#include "support/fixtures.hpp"
#include "support/synthetic_corpus.hpp"

using namespace firmgraph;
using firmgraph::testing::clause_texts;
using firmgraph::testing::fixture;
using firmgraph::testing::fixture_path;
using firmgraph::testing::TempDir;

namespace {

struct Outcome {
    int status;
    std::string out, err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int status = cli::run(args, out, err);
    return {status, out.str(), err.str()};
}

std::vector<std::string> intel_args(const std::filesystem::path& out) {
    return {"--cve-db", fixture_path("cves.json").string(), "--epss", fixture_path("epss.csv").string(),
            "--kev",    fixture_path("kev.json").string(),  "--out",  out.string(),
            "--log",    (out.parent_path() / (out.filename().string() + ".log")).string()};
}

std::vector<std::string> with(std::vector<std::string> a, std::initializer_list<std::string> more) {
    a.insert(a.end(), more);
    return a;
}

}  // namespace

TEST(Cli, AnalyzeR7800WritesArtifacts) {
    TempDir tmp;
    auto r = run(with(intel_args(tmp / "out"), {"analyze", fixture_path("netgear_r7800.json").string()}));
    EXPECT_EQ(r.status, cli::exit_ok) << r.err;
    EXPECT_NE(r.out.find("attack_points=0 potentially_compromised_oss=5 vulnerable_binaries=0"), std::string::npos);
    for (auto f : {"facts.P", "ag.dot", "ag.json", "metrics.json", "risk.csv", "paths.json"})
        EXPECT_TRUE(std::filesystem::exists(tmp / "out" / f)) << f;

    // Topology and vulExists facts are exactly the reference fact files.
    auto facts = logic::parse_program(util::read_file(tmp / "out" / "facts.P")).clauses();
    std::vector<logic::Clause> topo, vul;
    for (const auto& c : facts) {
        if (c.head.predicate == "dataFlow" || c.head.predicate == "externalInteraction") topo.push_back(c);
        if (c.head.predicate == "vulExists") vul.push_back(c);
    }
    EXPECT_EQ(clause_texts(topo), clause_texts(logic::parse_program(fixture("netgear_r7800.facts.P"))));
    EXPECT_EQ(clause_texts(vul), clause_texts(logic::parse_program(fixture("netgear_r7800.vulexists.P"))));

    auto csv = util::read_file(tmp / "out" / "risk.csv");
    // opkg flows into busybox, whose remote HIGH CVE is KEV-listed.
    EXPECT_NE(csv.find("\nbusybox,1,1,1.0,1,100.0,100\n"), std::string::npos) << csv;
}

TEST(Cli, AnalyzeWithoutGraphExitsTwo) {
    TempDir tmp;
    util::write_file_atomic(tmp / "plain.json", R"({"fW_name": "PLAIN", "graph": {"rc": {"peers": [], "version": []}}})");
    auto r = run(with(intel_args(tmp / "out"), {"analyze", (tmp / "plain.json").string()}));
    EXPECT_EQ(r.status, cli::exit_no_graph);
    EXPECT_NE(r.out.find("PLAIN: no attack graph"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(tmp / "out" / "ag.json"));
}

TEST(Cli, ConfigurationErrorsExitOne) {
    ::unsetenv("FIRMGRAPH_CVE_DB");
    TempDir tmp;
    auto r = run({"--out", (tmp / "out").string(), "analyze", fixture_path("netgear_r7800.json").string()});
    EXPECT_EQ(r.status, cli::exit_error);
    EXPECT_NE(r.err.find("config error"), std::string::npos) << r.err;

    r = run(with(intel_args(tmp / "out"), {"analyze", (tmp / "missing.json").string()}));
    EXPECT_EQ(r.status, cli::exit_error);

    r = run({"bogus"});
    EXPECT_EQ(r.status, cli::exit_error);
}

TEST(Cli, SchemaErrorNamesFileAndPointer) {
    TempDir tmp;
    util::write_file_atomic(tmp / "bad.json", R"({"fW_name": "X", "graph": {"a": {"peers": [{"name": "b", "type": "pipe", "info": ""}], "version": []}}})");
    auto r = run(with(intel_args(tmp / "out"), {"analyze", (tmp / "bad.json").string()}));
    EXPECT_EQ(r.status, cli::exit_error);
    EXPECT_NE(r.err.find("bad.json"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("/graph/a/peers/0/type"), std::string::npos) << r.err;
}

TEST(Cli, AnalyzeFactsFile) {
    TempDir tmp;
    auto r = run(with(intel_args(tmp / "out"), {"analyze", fixture_path("external_chain.P").string()}));
    EXPECT_EQ(r.status, cli::exit_ok) << r.err;
    EXPECT_NE(r.out.find("external_chain: attack_points=1 potentially_compromised_oss=0 vulnerable_binaries=1"), std::string::npos)
        << r.out;
    auto paths = nlohmann::json::parse(util::read_file(tmp / "out" / "paths.json"));
    EXPECT_EQ(paths["wget"][0]["binaries"], nlohmann::json({"openvpn", "wget"}));
    EXPECT_EQ(paths["wget"][0]["flows"], nlohmann::json({"environment"}));
}

TEST(Cli, FactsParseErrorHasLocation) {
    TempDir tmp;
    util::write_file_atomic(tmp / "broken.P", "dataFlow(a, b 'x').\n");
    auto r = run(with(intel_args(tmp / "out"), {"analyze", (tmp / "broken.P").string()}));
    EXPECT_EQ(r.status, cli::exit_error);
    EXPECT_NE(r.err.find("broken.P:1:"), std::string::npos) << r.err;
}

TEST(Cli, WhatIfOnInternalChain) {
    TempDir tmp;
    auto r = run(with(intel_args(tmp / "out"), {"whatif", fixture_path("internal_chain.P").string(), "--patched", "bzip2,nope"}));
    EXPECT_EQ(r.status, cli::exit_ok) << r.err;
    EXPECT_NE(r.out.find("warning: 'nope' is not a binary"), std::string::npos);
    auto doc = nlohmann::json::parse(util::read_file(tmp / "out" / "whatif.json"));
    EXPECT_EQ(doc["unknown"], nlohmann::json({"nope"}));
    EXPECT_EQ(doc["metrics_before"]["vulnerable_binaries"], 7);
    EXPECT_EQ(doc["metrics_after"]["vulnerable_binaries"], 4);
    EXPECT_EQ(doc["metrics_delta"]["vulnerable_binaries"], -3);
    EXPECT_EQ(doc["added_nodes"], 0);
    EXPECT_TRUE(std::filesystem::exists(tmp / "out" / "base" / "ag.dot"));
    EXPECT_TRUE(std::filesystem::exists(tmp / "out" / "patched" / "ag.dot"));
}

TEST(Cli, WhatIfWithUnknownOnlyIsNoChange) {
    TempDir tmp;
    auto r = run(with(intel_args(tmp / "out"), {"whatif", fixture_path("internal_chain.P").string(), "--patched", "nope"}));
    EXPECT_EQ(r.status, cli::exit_ok);
    auto doc = nlohmann::json::parse(util::read_file(tmp / "out" / "whatif.json"));
    EXPECT_EQ(doc["removed_nodes"], 0);
    EXPECT_EQ(doc["added_nodes"], 0);
    EXPECT_EQ(doc["metrics_delta"]["vulnerable_binaries"], 0);
}

TEST(Cli, CorpusSkipsMalformedFile) {
    TempDir tmp;
    auto corpus = firmgraph::testing::make_synthetic_corpus(6, 5);
    std::filesystem::create_directories(tmp / "fw");
    std::filesystem::create_directories(tmp / "intel");
    corpus.write(tmp / "fw", tmp / "intel");
    util::write_file_atomic(tmp / "fw" / "zz_broken.json", "{ not json");
    auto r = run({"--cve-db", (tmp / "intel" / "cves.json").string(), "--epss", (tmp / "intel" / "epss.csv").string(),
                  "--kev", (tmp / "intel" / "kev.json").string(), "--out", (tmp / "out").string(), "corpus",
                  (tmp / "fw").string()});
    EXPECT_EQ(r.status, cli::exit_ok) << r.err;
    EXPECT_NE(r.out.find("7 firmware: 6 analyzed"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("1 failed"), std::string::npos);
    auto report = nlohmann::json::parse(util::read_file(tmp / "out" / "corpus_report.json"));
    EXPECT_EQ(report["results"][6]["status"], "failed");
    auto log = util::read_file(tmp / "out" / "run.log.jsonl");
    EXPECT_NE(log.find("zz_broken.json"), std::string::npos);

    auto oracle = firmgraph::testing::oracle_report(corpus);
    EXPECT_EQ(util::read_file(tmp / "out" / "corpus_stats.json"), firmgraph::testing::oracle_stats_json(oracle, true));
    EXPECT_EQ(util::read_file(tmp / "out" / "risk_table.csv"), firmgraph::testing::oracle_risk_csv(oracle));
}

TEST(Cli, CorpusOfOneHasMeanEqualMax) {
    TempDir tmp;
    std::filesystem::create_directories(tmp / "fw");
    std::filesystem::copy_file(fixture_path("netgear_r7800.json"), tmp / "fw" / "r7800.json");
    std::filesystem::copy_file(fixture_path("netgear_r7800.versions.txt"), tmp / "fw" / "r7800.versions.txt");
    auto r = run(with(intel_args(tmp / "out"), {"corpus", (tmp / "fw").string()}));
    EXPECT_EQ(r.status, cli::exit_ok) << r.err;
    auto stats = nlohmann::json::parse(util::read_file(tmp / "out" / "corpus_stats.json"));
    EXPECT_EQ(stats["firmware_count"], 1);
    for (auto k : {"attack_points", "potentially_compromised_oss", "vulnerable_binaries"})
        EXPECT_DOUBLE_EQ(stats["mean"][k].get<double>(), stats["max"][k].get<double>()) << k;
}

TEST(Cli, CorpusExcludeEmpty) {
    TempDir tmp;
    auto corpus = firmgraph::testing::make_synthetic_corpus(10, 9);
    std::filesystem::create_directories(tmp / "fw");
    std::filesystem::create_directories(tmp / "intel");
    corpus.write(tmp / "fw", tmp / "intel");
    auto r = run({"--cve-db", (tmp / "intel" / "cves.json").string(), "--out", (tmp / "out").string(), "--exclude-empty",
                  "corpus", (tmp / "fw").string()});
    EXPECT_EQ(r.status, cli::exit_ok) << r.err;
    auto oracle = firmgraph::testing::oracle_report(corpus);
    EXPECT_EQ(util::read_file(tmp / "out" / "corpus_stats.json"), firmgraph::testing::oracle_stats_json(oracle, false));
}

TEST(Cli, OutputsAreByteIdenticalAcrossRuns) {
    TempDir tmp;
    auto corpus = firmgraph::testing::make_synthetic_corpus(8, 21);
    std::filesystem::create_directories(tmp / "fw");
    std::filesystem::create_directories(tmp / "intel");
    corpus.write(tmp / "fw", tmp / "intel");
    auto base = std::vector<std::string>{"--cve-db", (tmp / "intel" / "cves.json").string(), "--epss",
                                         (tmp / "intel" / "epss.csv").string(), "--kev", (tmp / "intel" / "kev.json").string()};
    auto a = run(with(base, {"--out", (tmp / "a").string(), "--workers", "1", "corpus", (tmp / "fw").string()}));
    auto b = run(with(base, {"--out", (tmp / "b").string(), "--workers", "4", "corpus", (tmp / "fw").string()}));
    ASSERT_EQ(a.status, cli::exit_ok);
    ASSERT_EQ(b.status, cli::exit_ok);
    std::size_t compared = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(tmp / "a")) {
        if (!e.is_regular_file() || e.path().filename() == "run.log.jsonl") continue;
        auto rel = std::filesystem::relative(e.path(), tmp / "a");
        EXPECT_EQ(util::read_file(e.path()), util::read_file(tmp / "b" / rel)) << rel;
        ++compared;
    }
    EXPECT_GT(compared, 20u);
}

TEST(Cli, ImportNvdAndExport) {
    TempDir tmp;
    auto r = run({"import-nvd", fixture_path("nvd_sample.json").string(), "-o", (tmp / "db.json").string(), "--log",
                  (tmp / "log").string()});
    EXPECT_EQ(r.status, cli::exit_ok) << r.err;
    EXPECT_NE(r.out.find("4 records"), std::string::npos);

    r = run({"export", fixture_path("external_chain.P").string(), "--format", "dot"});
    EXPECT_EQ(r.status, cli::exit_ok) << r.err;
    EXPECT_EQ(r.out.rfind("digraph", 0), 0u) << r.out;

    util::write_file_atomic(tmp / "empty.P", "dataFlow(a, b, 'file').\n");
    r = run({"export", (tmp / "empty.P").string(), "--format", "json"});
    EXPECT_EQ(r.status, cli::exit_no_graph);
}
