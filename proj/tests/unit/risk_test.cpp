#include <cmath>

#include <gtest/gtest.h>
#include <json.hpp>

#include "firmgraph/error.hpp"
#include "firmgraph/firmware/model.hpp"
#include "firmgraph/logic/parser.hpp"
#include "firmgraph/pipeline.hpp"
#include "firmgraph/risk/risk_model.hpp"
#include "support/fixtures.hpp"
#include "support/synthetic_corpus.hpp"
#include "support/risk_ranking.hpp"

using namespace firmgraph;
using namespace firmgraph::risk;
using firmgraph::testing::fixture;

namespace {

std::string star_facts(const std::string& hub, int spokes, const std::string& prefix) {
    std::string out = fmt::format("bugHyp({}, 'LOCAL', 'Undefined').\n", hub);
    for (int i = 0; i < spokes; ++i) {
        out += fmt::format("dataFlow({}, {}{}, 'socket').\n", hub, prefix, i);
        out += fmt::format("vulExists('CVE-2020-{}', {}{}, 'NETWORK', 'availability_loss', 'HIGH').\n", 9000 + i, prefix, i);
    }
    return out;
}

FirmwareAnalysis facts_analysis(const std::string& text) { return analyze_facts("t", logic::parse_program(text)); }

std::vector<FirmwareRiskInput> inputs_of(const std::vector<FirmwareAnalysis>& as) {
    std::vector<FirmwareRiskInput> out;
    for (const auto& a : as) out.push_back({&a.graph, &a.matches});
    return out;
}

}  // namespace

TEST(CorpusStats, MeansAndMaxima) {
    std::vector<ag::AgMetrics> ms{{2, 3, 1}, {0, 1, 3}};
    auto s = corpus_stats(ms);
    EXPECT_EQ(s.firmware_count, 2u);
    EXPECT_DOUBLE_EQ(s.mean_attack_points, 1.0);
    EXPECT_DOUBLE_EQ(s.mean_potentially_compromised_oss, 2.0);
    EXPECT_DOUBLE_EQ(s.mean_vulnerable_binaries, 2.0);
    EXPECT_EQ(s.max_attack_points, 2u);
    EXPECT_EQ(s.max_potentially_compromised_oss, 3u);
    EXPECT_EQ(s.max_vulnerable_binaries, 3u);
}

TEST(CorpusStats, SingleFirmwareMeanEqualsMax) {
    std::vector<ag::AgMetrics> ms{{4, 7, 9}};
    auto s = corpus_stats(ms);
    EXPECT_DOUBLE_EQ(s.mean_attack_points, 4.0);
    EXPECT_DOUBLE_EQ(s.mean_potentially_compromised_oss, 7.0);
    EXPECT_DOUBLE_EQ(s.mean_vulnerable_binaries, 9.0);
    EXPECT_EQ(s.max_vulnerable_binaries, 9u);
}

TEST(CorpusStats, EmptyThrows) { EXPECT_THROW(corpus_stats({}), Error); }

TEST(CorpusStats, JsonRoundsMeansToOneDecimal) {
    std::vector<ag::AgMetrics> ms{{1, 0, 0}, {0, 0, 0}, {0, 0, 1}};
    auto doc = nlohmann::json::parse(corpus_stats_json(corpus_stats(ms)));
    EXPECT_EQ(doc["firmware_count"], 3);
    EXPECT_DOUBLE_EQ(doc["mean"]["attack_points"].get<double>(), 0.3);
    EXPECT_EQ(doc["max"]["vulnerable_binaries"], 1);
}

TEST(Impact, Examples) {
    EXPECT_DOUBLE_EQ(impact(4, 22), 5.5);
    EXPECT_DOUBLE_EQ(round1(impact(87, 368)), 4.2);
    EXPECT_DOUBLE_EQ(impact(1, 0), 0.0);
    EXPECT_THROW(impact(0, 3), Error);
}

TEST(Risk, Examples) {
    EXPECT_NEAR(risk::risk(5.5, 94.1), 518, 1);
    EXPECT_NEAR(risk::risk(368.0 / 87.0, 96.9), 410, 1);
    EXPECT_DOUBLE_EQ(risk::risk(3.0, 0.0), 0.0);
}

TEST(Risk, ReferenceRankingReplays) {
    for (const auto& row : firmgraph::testing::reference_risk_rows) {
        SCOPED_TRACE(std::string(row.binary));
        double i = impact(row.occurrences, row.interactions);
        // Some reference impacts are shown without their decimal (openssl: 3.07 as 3).
        EXPECT_NEAR(round1(i), row.impact, 0.11);
        EXPECT_NEAR(static_cast<double>(std::llround(risk::risk(i, row.likelihood))), static_cast<double>(row.risk), 1.0);
    }
}

TEST(RiskTable, ExampleRow) {
    std::vector<FirmwareAnalysis> as{facts_analysis(star_facts("x", 5, "a")), facts_analysis(star_facts("x", 6, "b"))};
    vuln::ExploitIntel intel;
    intel.kev.insert("CVE-2020-9000");
    // x itself carries the KEV-listed CVE in both images.
    for (auto& a : as) {
        vuln::VulnMatch m;
        m.binary = "x";
        m.cve.cve_id = "CVE-2020-9000";
        a.matches.push_back(m);
    }
    auto in = inputs_of(as);
    auto rows = binary_risk_table(in, intel);
    ASSERT_FALSE(rows.empty());
    EXPECT_EQ(rows[0].binary, "x");
    EXPECT_EQ(rows[0].occurrences, 2u);
    EXPECT_EQ(rows[0].interactions, 11u);
    EXPECT_DOUBLE_EQ(rows[0].impact, 5.5);
    EXPECT_EQ(rows[0].cve_count, 1u);
    EXPECT_DOUBLE_EQ(rows[0].likelihood, 100.0);
    EXPECT_DOUBLE_EQ(rows[0].risk, 550.0);
    // Spokes are goals too, one interaction each.
    EXPECT_EQ(rows.size(), 12u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].occurrences, 1u);
        EXPECT_EQ(rows[i].interactions, 1u);
    }
}

TEST(RiskTable, EmptyCorpusGivesNoRows) {
    EXPECT_TRUE(binary_risk_table({}, {}).empty());
    std::vector<FirmwareAnalysis> as{facts_analysis("dataFlow(a, b, 'file').\n")};
    auto in = inputs_of(as);
    EXPECT_TRUE(binary_risk_table(in, {}).empty());
}

TEST(RiskTable, ExternalChainRows) {
    auto a = analyze_facts("external_chain", logic::parse_program(fixture("external_chain.P")));
    vuln::ExploitIntel intel;
    intel.epss = vuln::load_epss_csv(fixture("epss.csv"));
    FirmwareRiskInput in{&a.graph, &a.matches};
    auto rows = binary_risk_table(std::span(&in, 1), intel);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].binary, "wget");
    EXPECT_EQ(rows[0].interactions, 1u);
    EXPECT_EQ(rows[0].cve_count, 2u);
    EXPECT_DOUBLE_EQ(rows[0].likelihood, 95.8);
    EXPECT_EQ(rows[1].binary, "openvpn");
    EXPECT_NEAR(rows[1].likelihood, 1.3, 1e-9);
}

TEST(RiskTable, RankingInvariantUnderLikelihoodScaling) {
    auto corpus = firmgraph::testing::make_synthetic_corpus(12, 11);
    auto db = vuln::load_cve_db(corpus.cve_db_json()).db;
    std::vector<FirmwareAnalysis> as;
    for (const auto& fw : corpus.firmware)
        as.push_back(analyze_firmware(firmware::load_firmware_graph(fw.document()),
                                      firmware::load_version_list(fw.versions_text()), db));
    auto in = inputs_of(as);
    vuln::ExploitIntel base{{}, corpus.epss};
    vuln::ExploitIntel scaled{{}, corpus.epss};
    for (auto& [id, v] : scaled.epss) v *= 0.5;
    auto a = binary_risk_table(in, base);
    auto b = binary_risk_table(in, scaled);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].binary, b[i].binary);
        EXPECT_NEAR(b[i].risk, a[i].risk * 0.5, 1e-9);
    }
}

TEST(RiskTable, CsvAndJsonFormats) {
    std::vector<BinaryRiskRow> rows{{"cups", 4, 22, 5.5, 18, 94.1, 517.55}, {"busybox", 3, 1, 1.0 / 3.0, 2, 12.0, 4.0}};
    EXPECT_EQ(risk_table_csv(rows),
              "binary,occurrences,interactions,impact,cves,likelihood,risk\n"
              "cups,4,22,5.5,18,94.1,518\n"
              "busybox,3,1,0.3,2,12.0,4\n");
    auto doc = nlohmann::json::parse(risk_table_json(rows));
    ASSERT_EQ(doc.size(), 2u);
    EXPECT_EQ(doc[0]["binary"], "cups");
    EXPECT_EQ(doc[0]["risk"], 518);
    EXPECT_DOUBLE_EQ(doc[1]["impact"].get<double>(), 0.3);
    EXPECT_EQ(nlohmann::json::parse(metrics_json({1, 2, 3})),
              nlohmann::json({{"attack_points", 1}, {"potentially_compromised_oss", 2}, {"vulnerable_binaries", 3}}));
}

TEST(RiskTable, SyntheticCorpusMatchesOracle) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        SCOPED_TRACE(seed);
        auto corpus = firmgraph::testing::make_synthetic_corpus(10, seed);
        auto db = vuln::load_cve_db(corpus.cve_db_json()).db;
        std::vector<FirmwareAnalysis> as;
        for (const auto& fw : corpus.firmware)
            as.push_back(analyze_firmware(firmware::load_firmware_graph(fw.document()),
                                          firmware::load_version_list(fw.versions_text()), db));
        auto oracle = firmgraph::testing::oracle_report(corpus);
        std::vector<ag::AgMetrics> ms;
        for (std::size_t i = 0; i < as.size(); ++i) {
            const auto& m = as[i].metrics;
            const auto& o = oracle.metrics[i];
            EXPECT_EQ(m.attack_points, o.attack_points) << corpus.firmware[i].stem;
            EXPECT_EQ(m.potentially_compromised_oss, o.oss) << corpus.firmware[i].stem;
            EXPECT_EQ(m.vulnerable_binaries, o.vulnerable) << corpus.firmware[i].stem;
            EXPECT_EQ(as[i].graph.proof.nodes.empty(), o.empty) << corpus.firmware[i].stem;
            ms.push_back(m);
        }
        EXPECT_EQ(corpus_stats_json(corpus_stats(ms)), firmgraph::testing::oracle_stats_json(oracle, true));
        auto in = inputs_of(as);
        auto rows = binary_risk_table(in, vuln::ExploitIntel{corpus.kev, corpus.epss});
        EXPECT_EQ(risk_table_csv(rows), firmgraph::testing::oracle_risk_csv(oracle));
    }
}
