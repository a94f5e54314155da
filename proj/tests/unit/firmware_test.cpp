#include <gtest/gtest.h>

#include "firmgraph/error.hpp"
#include "firmgraph/firmware/model.hpp"
#include "firmgraph/logic/parser.hpp"
#include "support/fixtures.hpp"

using namespace firmgraph;
using namespace firmgraph::firmware;
using firmgraph::testing::clause_texts;
using firmgraph::testing::fixture;

namespace {

std::string schema_path_of(std::string_view doc) {
    try {
        load_firmware_graph(doc);
    } catch (const SchemaError& e) {
        return e.path();
    }
    return "<no error>";
}

std::vector<std::string> entry_versions(const BinaryInventory& inv, const std::string& name) {
    std::vector<std::string> out;
    for (const auto& e : inv.entries)
        if (e.name == name) out.push_back(e.version);
    return out;
}

}  // namespace

TEST(FirmwareGraph, LoadsR7800Document) {
    auto fw = load_firmware_graph(fixture("netgear_r7800.json"));
    EXPECT_EQ(fw.fw_name, "NETGEAR_R7800_da9");
    const auto& uhttpd = fw.binaries.at("uhttpd");
    ASSERT_GE(uhttpd.peers.size(), 4u);
    EXPECT_EQ(uhttpd.peers[3].target, "INTERNET");
    EXPECT_EQ(uhttpd.peers[3].type, LinkType::border_binary);
    EXPECT_TRUE(uhttpd.peers[3].info.empty());
    EXPECT_EQ(uhttpd.peers[1].info, (std::vector<std::string>{"QUERY_STRING", "PATH_INFO"}));
    EXPECT_EQ(fw.binaries.at("opkg").versions, (std::vector<std::string>{"0.1.8", "v1", "v2"}));
    EXPECT_FALSE(fw.binaries.at("opkg").implicit);
}

TEST(FirmwareGraph, DanglingPeersBecomeImplicitWithWarning) {
    auto fw = load_firmware_graph(fixture("netgear_r7800.json"));
    // afpd, busybox, net-cgi, proccgi, tar, wget are only referenced as peers.
    EXPECT_EQ(fw.binaries.size(), 8u);
    EXPECT_TRUE(fw.binaries.at("wget").implicit);
    EXPECT_TRUE(fw.binaries.at("net-cgi").implicit);
    EXPECT_EQ(fw.warnings.size(), 6u);
    EXPECT_FALSE(fw.binaries.contains("INTERNET"));
}

TEST(FirmwareGraph, EmptyGraph) {
    auto fw = load_firmware_graph(R"({"fW_name":"x","graph":{}})");
    EXPECT_EQ(fw.fw_name, "x");
    EXPECT_TRUE(fw.binaries.empty());
    EXPECT_TRUE(emit_topology_facts(fw).empty());
}

TEST(FirmwareGraph, UnknownLinkTypeNamesPath) {
    auto doc = fixture("netgear_r7800.json");
    auto at = doc.find("\"exec\"");
    ASSERT_NE(at, std::string::npos);
    doc.replace(at, 6, "\"pipe\"");
    try {
        load_firmware_graph(doc);
        FAIL() << "expected a schema error";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.path(), "/graph/uhttpd/peers/2/type");
        EXPECT_NE(std::string(e.what()).find("pipe"), std::string::npos);
    }
}

TEST(FirmwareGraph, SchemaErrorsCarryPaths) {
    EXPECT_EQ(schema_path_of(R"({"fW_name":"x"})"), "/graph");
    EXPECT_EQ(schema_path_of(R"({"graph":{}})"), "/fW_name");
    EXPECT_EQ(schema_path_of(R"([1])"), "/");
    EXPECT_EQ(schema_path_of(R"({"fW_name":"x","graph":{"a":{}}})"), "/graph/a/peers");
    EXPECT_EQ(schema_path_of(R"({"fW_name":"x","graph":{"a":{"peers":[{"type":"exec"}]}}})"), "/graph/a/peers/0/name");
    EXPECT_EQ(schema_path_of(R"({"fW_name":"x","graph":{"a":{"peers":[],"version":"1.0"}}})"), "/graph/a/version");
    EXPECT_EQ(schema_path_of(R"({"fW_name":"x","graph":{"a":{"peers":[{"name":"b","type":"exec","info":[3]}]}}})"),
              "/graph/a/peers/0/info/0");
    EXPECT_EQ(schema_path_of(R"({"fW_name":"x","graph":{"a":{"peers":[{"name":"INTERNET","type":"border_binary","info":["x"]}]}}})"),
              "/graph/a/peers/0/info");
    EXPECT_EQ(schema_path_of("{not json"), "/");
}

TEST(FirmwareGraph, DuplicateBinaryRejected) {
    try {
        load_firmware_graph(R"({"fW_name":"x","graph":{"a":{"peers":[]},"a":{"peers":[]}}})");
        FAIL() << "expected a schema error";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.path(), "/graph/a");
        EXPECT_NE(std::string(e.what()).find("duplicate binary"), std::string::npos);
    }
}

TEST(FirmwareGraph, InfoAcceptsStringOrArray) {
    auto fw = load_firmware_graph(
        R"({"fW_name":"x","graph":{"a":{"peers":[{"name":"b","type":"environment","info":"PATH"},)"
        R"({"name":"c","type":"file","info":["/tmp/x","/tmp/y"]},{"name":"d","type":"shared_memory"}],"version":[]}}})");
    const auto& peers = fw.binaries.at("a").peers;
    EXPECT_EQ(peers[0].info, std::vector<std::string>{"PATH"});
    EXPECT_EQ(peers[1].info.size(), 2u);
    EXPECT_TRUE(peers[2].info.empty());
    EXPECT_EQ(peers[2].type, LinkType::shared_memory);
}

TEST(TopologyFacts, R7800BinaryModel) {
    auto fw = load_firmware_graph(fixture("netgear_r7800.json"));
    auto facts = emit_topology_facts(fw);
    auto expected = clause_texts(logic::parse_program(fixture("netgear_r7800.facts.P")));
    EXPECT_EQ(clause_texts(facts), expected);
}

TEST(TopologyFacts, UhttpdEntry) {
    auto fw = load_firmware_graph(fixture("netgear_r7800.json"));
    std::vector<std::string> texts;
    for (const auto& c : emit_topology_facts(fw)) texts.push_back(logic::format_clause(c));
    auto has = [&](const std::string& t) { return std::find(texts.begin(), texts.end(), t) != texts.end(); };
    EXPECT_TRUE(has("dataFlow(uhttpd, net_cgi, 'exec')."));
    EXPECT_TRUE(has("externalInteraction('Internet', uhttpd, internet)."));
}

TEST(TopologyFacts, OrderIsSourceThenPeer) {
    auto fw = load_firmware_graph(
        R"({"fW_name":"x","graph":{"zeta":{"peers":[{"name":"b","type":"exec"},{"name":"a","type":"exec"}]},)"
        R"("alpha":{"peers":[{"name":"zeta","type":"socket"}]}}})");
    std::vector<std::string> texts;
    for (const auto& c : emit_topology_facts(fw)) texts.push_back(logic::format_clause(c));
    EXPECT_EQ(texts, (std::vector<std::string>{"dataFlow(alpha, zeta, 'socket').", "dataFlow(zeta, b, 'exec').",
                                               "dataFlow(zeta, a, 'exec')."}));
}

TEST(TopologyFacts, CountsMatchLinks) {
    auto fw = load_firmware_graph(fixture("netgear_r7800.json"));
    std::size_t flows = 0, borders = 0;
    for (const auto& [name, bin] : fw.binaries)
        for (const auto& p : bin.peers) (p.type == LinkType::border_binary ? borders : flows)++;
    std::size_t df = 0, ei = 0;
    for (const auto& c : emit_topology_facts(fw)) (c.head.predicate == "dataFlow" ? df : ei)++;
    EXPECT_EQ(df, flows);
    EXPECT_EQ(ei, borders);
}

TEST(TopologyFacts, DeterministicAndSelfLoopsKept) {
    auto doc = R"({"fW_name":"x","graph":{"a":{"peers":[{"name":"a","type":"file"}]}}})";
    auto one = emit_topology_facts(load_firmware_graph(doc));
    auto two = emit_topology_facts(load_firmware_graph(doc));
    EXPECT_EQ(one, two);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(logic::format_clause(one[0]), "dataFlow(a, a, 'file').");
}

TEST(TopologyFacts, SanitationCollisionRejected) {
    auto fw = load_firmware_graph(R"({"fW_name":"x","graph":{"net-cgi":{"peers":[]},"net_cgi":{"peers":[]}}})");
    EXPECT_THROW(emit_topology_facts(fw), SchemaError);
}

TEST(TopologyFacts, NonIdentifierNamesAreQuoted) {
    auto fw = load_firmware_graph(R"({"fW_name":"x","graph":{"Foo.bin":{"peers":[{"name":"lib.so","type":"file"}]}}})");
    auto facts = emit_topology_facts(fw);
    ASSERT_EQ(facts.size(), 1u);
    auto text = logic::format_clause(facts[0]);
    EXPECT_EQ(text, "dataFlow('Foo.bin', 'lib.so', 'file').");
    EXPECT_EQ(logic::parse_program(text).clauses()[0], facts[0]);
}

TEST(VersionList, R7800Inventory) {
    auto inv = load_version_list(fixture("netgear_r7800.versions.txt"));
    EXPECT_EQ(inv.size(), 12u);
    EXPECT_NE(std::find(inv.entries.begin(), inv.entries.end(), InventoryEntry{"opkg", "0.1.8"}), inv.entries.end());
    EXPECT_NE(std::find(inv.entries.begin(), inv.entries.end(), InventoryEntry{"uhttpd", "*"}), inv.entries.end());
}

TEST(VersionList, EmptyAndMalformed) {
    EXPECT_TRUE(load_version_list("").empty());
    EXPECT_TRUE(load_version_list("\n\n").empty());
    try {
        load_version_list("busybox");
        FAIL() << "expected a schema error";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.path(), "line 1");
    }
    try {
        load_version_list("a, 1\n\nb 2\n");
        FAIL() << "expected a schema error";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.path(), "line 3");
    }
}

TEST(VersionList, DuplicatesCollapse) {
    auto inv = load_version_list("tar, 1.23\ntar, 1.23\ntar,1.23\ntar, 4.2BSD\n");
    EXPECT_EQ(inv.size(), 2u);
}

TEST(MergeInventory, UnionWithR7800) {
    auto fw = load_firmware_graph(fixture("netgear_r7800.json"));
    auto merged = merge_inventory(fw, load_version_list(fixture("netgear_r7800.versions.txt")));
    auto opkg = entry_versions(merged, "opkg");
    std::sort(opkg.begin(), opkg.end());
    EXPECT_EQ(opkg, (std::vector<std::string>{"0.1.8", "1", "v1", "v2"}));
    EXPECT_EQ(entry_versions(merged, "proccgi"), std::vector<std::string>{"*"});
    EXPECT_EQ(entry_versions(merged, "wget"), std::vector<std::string>{"1.13.4"});
    EXPECT_EQ(entry_versions(merged, "hostapd"), std::vector<std::string>{"2.5"});
}

TEST(MergeInventory, EmptyAndWildcard) {
    EXPECT_TRUE(merge_inventory(FirmwareGraph{}, BinaryInventory{}).empty());
    auto fw = load_firmware_graph(R"({"fW_name":"x","graph":{"proccgi":{"peers":[],"version":[]}}})");
    auto merged = merge_inventory(fw, BinaryInventory{});
    ASSERT_EQ(merged.size(), 1u);
    EXPECT_EQ(merged.entries[0], (InventoryEntry{"proccgi", "*"}));
}
