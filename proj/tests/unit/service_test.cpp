#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "firmgraph/ag/attack_graph.hpp"
#include "firmgraph/ag/export.hpp"
#include "firmgraph/logic/parser.hpp"
#include "firmgraph/service/server.hpp"
#include "support/fixtures.hpp"

using namespace firmgraph;
using firmgraph::testing::fixture;
using firmgraph::testing::TempDir;
using nlohmann::json;

namespace {

std::shared_ptr<const IntelSources> fixture_intel() {
    auto intel = std::make_shared<IntelSources>();
    intel->db = vuln::load_cve_db(fixture("cves.json")).db;
    intel->exploit.epss = vuln::load_epss_csv(fixture("epss.csv"));
    intel->exploit.kev = vuln::load_kev_json(fixture("kev.json"));
    return intel;
}

class Running {
public:
    explicit Running(service::ServerConfig config = {}, bool with_intel = true)
        : server_(prepare(config), with_intel ? fixture_intel() : nullptr, "fixture-intel") {
        port_ = server_.bind();
        thread_ = std::thread([this] { server_.serve(); });
        server_.wait_until_ready();
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    }
    ~Running() {
        server_.stop();
        thread_.join();
    }

    httplib::Client& client() { return *client_; }
    service::Server& server() { return server_; }
    int port() const { return port_; }

    json post(const std::string& path, const std::string& body, int expect) {
        auto r = client_->Post(path, body, "application/json");
        EXPECT_TRUE(r);
        if (!r) return {};
        EXPECT_EQ(r->status, expect) << r->body;
        return json::parse(r->body);
    }
    json get(const std::string& path, int expect = 200) {
        auto r = client_->Get(path);
        EXPECT_TRUE(r);
        if (!r) return {};
        EXPECT_EQ(r->status, expect) << r->body;
        return json::parse(r->body);
    }

private:
    static service::ServerConfig prepare(service::ServerConfig c) {
        c.port = 0;
        return c;
    }

    service::Server server_;
    int port_ = -1;
    std::thread thread_;
    std::unique_ptr<httplib::Client> client_;
};

const std::string plain_doc = R"({"fW_name": "PLAIN", "graph": {"rc": {"peers": [], "version": []}}})";

}  // namespace

TEST(Service, Health) {
    Running s;
    EXPECT_GT(s.port(), 0);
    EXPECT_EQ(s.get("/api/health")["status"], "ok");
}

TEST(Service, AnalyzeR7800Document) {
    Running s;
    auto body = s.post("/api/firmware", fixture("netgear_r7800.json"), 201);
    EXPECT_EQ(body["fw_name"], "NETGEAR_R7800_da9");
    // hostapd is only named by the version list.
    EXPECT_EQ(body["metrics"], json({{"attack_points", 0}, {"potentially_compromised_oss", 4}, {"vulnerable_binaries", 0}}));
    EXPECT_EQ(body["goal_binaries"], json({"busybox", "opkg", "tar", "wget"}));
    EXPECT_EQ(body["parent"], nullptr);
    EXPECT_EQ(body["warnings"].size(), 6u);
    auto id = body["id"].get<std::string>();
    EXPECT_EQ(s.get("/api/snapshots/" + id)["id"], id);

    // Same inputs, same snapshot.
    EXPECT_EQ(s.post("/api/firmware", fixture("netgear_r7800.json"), 201)["id"], id);

    json wrapped{{"firmware", json::parse(fixture("netgear_r7800.json"))}, {"versions", fixture("netgear_r7800.versions.txt")}};
    auto with_versions = s.post("/api/firmware", wrapped.dump(), 201);
    EXPECT_NE(with_versions["id"], id);
    EXPECT_EQ(with_versions["goal_binaries"], json({"busybox", "hostapd", "opkg", "tar", "wget"}));
}

TEST(Service, EmptyGraphDocument) {
    Running s;
    auto body = s.post("/api/firmware", R"({"fW_name": "EMPTY", "graph": {}})", 201);
    EXPECT_EQ(body["metrics"], json({{"attack_points", 0}, {"potentially_compromised_oss", 0}, {"vulnerable_binaries", 0}}));
    EXPECT_EQ(body["node_count"], 0);
}

TEST(Service, ValidationErrors) {
    Running s;
    EXPECT_EQ(s.post("/api/firmware", R"({"fW_name": "X"})", 422)["path"], "/graph");
    EXPECT_EQ(s.post("/api/firmware", "{ nope", 422)["path"], "/");
    EXPECT_EQ(s.post("/api/firmware",
                     R"({"fW_name": "X", "graph": {"a": {"peers": [{"name": "b", "type": "pipe", "info": ""}], "version": []}}})",
                     422)["path"],
              "/graph/a/peers/0/type");
    EXPECT_EQ(s.post("/api/firmware", R"({"firmware": [], "versions": ""})", 422)["path"], "/firmware");
    auto bad_versions = json{{"firmware", json::parse(plain_doc)}, {"versions", "rc 1.0\n"}};
    auto body = s.post("/api/firmware", bad_versions.dump(), 422);
    EXPECT_EQ(body["path"].get<std::string>().rfind("versions", 0), 0u) << body;
}

TEST(Service, UnknownSnapshotIs404) {
    Running s;
    EXPECT_EQ(s.get("/api/snapshots/abcdef", 404)["error"], "unknown snapshot");
    s.get("/api/snapshots/abcdef/graph", 404);
    s.get("/api/snapshots/abcdef/risk", 404);
    s.post("/api/snapshots/abcdef/whatif", R"({"patched": []})", 404);
}

TEST(Service, NoIntelAnswers503) {
    Running s({}, false);
    s.post("/api/firmware", plain_doc, 503);
    EXPECT_EQ(s.get("/api/health")["status"], "ok");
}

TEST(Service, GraphJsonRoundTripsAndDot) {
    Running s;
    auto id = s.post("/api/firmware", json{{"facts", fixture("internal_chain.P")}, {"name", "internal_chain"}}.dump(), 201)["id"].get<std::string>();
    auto r = s.client().Get("/api/snapshots/" + id + "/graph");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    auto expected = ag::generate_ag(ag::inputs_from_facts(logic::parse_program(fixture("internal_chain.P"))),
                                    ag::shipped_ruleset(ag::RulesetKind::combined));
    EXPECT_EQ(r->body, ag::export_json(expected.proof));
    auto imported = ag::proof_graph_from_json(r->body);
    EXPECT_EQ(ag::export_json(imported), r->body);

    r = s.client().Get("/api/snapshots/" + id + "/graph?format=dot");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(r->body.rfind("digraph", 0), 0u);
    EXPECT_EQ(r->body, ag::export_dot(expected.proof));

    r = s.client().Get("/api/snapshots/" + id + "/graph?format=svg");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 400);
}

TEST(Service, WhatIfMatchesLibraryAndKeepsParent) {
    Running s;
    auto facts = fixture("internal_chain.P");
    auto parent = s.post("/api/firmware", json{{"facts", facts}, {"name", "internal_chain"}}.dump(), 201);
    auto id = parent["id"].get<std::string>();
    auto before_graph = s.client().Get("/api/snapshots/" + id + "/graph")->body;

    auto child = s.post("/api/snapshots/" + id + "/whatif", R"({"patched": ["bzip2", "nope"]})", 201);
    EXPECT_EQ(child["parent"], id);
    EXPECT_EQ(child["unknown"], json({"nope"}));
    EXPECT_EQ(child["metrics"]["vulnerable_binaries"], 4);
    EXPECT_EQ(child["metrics_delta"]["vulnerable_binaries"], -3);

    auto inputs = ag::inputs_from_facts(logic::parse_program(facts));
    const auto& rules = ag::shipped_ruleset(ag::RulesetKind::combined);
    auto lib = ag::whatif_patch(inputs, rules, {"bzip2", "nope"});
    auto d = ag::diff(ag::generate_ag(inputs, rules), lib.graph);
    EXPECT_EQ(child["removed_nodes"], d.removed_nodes);
    EXPECT_EQ(child["added_nodes"], d.added_nodes);
    auto child_graph = s.client().Get("/api/snapshots/" + child["id"].get<std::string>() + "/graph")->body;
    EXPECT_EQ(child_graph, ag::export_json(lib.graph.proof));

    // The parent is untouched.
    EXPECT_EQ(s.client().Get("/api/snapshots/" + id + "/graph")->body, before_graph);
    EXPECT_EQ(s.get("/api/snapshots/" + id)["metrics"], parent["metrics"]);

    auto none = s.post("/api/snapshots/" + id + "/whatif", R"({"patched": []})", 201);
    EXPECT_EQ(none["removed_nodes"], 0);
    EXPECT_EQ(none["added_nodes"], 0);

    EXPECT_EQ(s.post("/api/snapshots/" + id + "/whatif", R"({"patched": "bzip2"})", 422)["path"], "/patched");
    EXPECT_EQ(s.post("/api/snapshots/" + id + "/whatif", R"({"patched": ["a", 3]})", 422)["path"], "/patched/1");
}

TEST(Service, RiskRows) {
    service::ServerConfig c;
    c.ruleset = ag::RulesetKind::external_threat;
    Running s(c);
    auto body = json{{"firmware", json::parse(fixture("external_chain.json"))}};
    auto id = s.post("/api/firmware", body.dump(), 201)["id"].get<std::string>();
    auto rows = s.get("/api/snapshots/" + id + "/risk");
    std::set<std::string> names;
    for (const auto& r : rows) names.insert(r["binary"].get<std::string>());
    EXPECT_TRUE(names.contains("openvpn")) << rows;
    EXPECT_TRUE(names.contains("wget")) << rows;

    auto child = s.post("/api/snapshots/" + id + "/whatif", R"({"patched": ["openvpn", "wget"]})", 201);
    EXPECT_EQ(child["node_count"], 0);
    EXPECT_TRUE(s.get("/api/snapshots/" + child["id"].get<std::string>() + "/risk").empty());
}

TEST(Service, PathsEndpoint) {
    Running s;
    auto id = s.post("/api/firmware", json{{"facts", fixture("internal_chain.P")}}.dump(), 201)["id"].get<std::string>();
    auto paths = s.get("/api/snapshots/" + id + "/paths?target=zip");
    ASSERT_EQ(paths.size(), 1u);
    EXPECT_EQ(paths[0]["binaries"], json({"httpd", "bzip2", "unzip", "zip"}));
    EXPECT_EQ(paths[0]["entry"], "internal");
    s.get("/api/snapshots/" + id + "/paths?target=tar", 404);
    s.get("/api/snapshots/" + id + "/paths", 400);
}

TEST(Service, FactsUploadErrors) {
    Running s;
    auto body = s.post("/api/firmware", json{{"facts", "dataFlow(a, b\n"}}.dump(), 422);
    EXPECT_EQ(body["path"].get<std::string>().rfind("/facts:", 0), 0u) << body;
    EXPECT_EQ(s.post("/api/firmware", json{{"facts", "a(X) :- b(X).\n"}}.dump(), 422)["path"], "/facts");
    EXPECT_EQ(s.post("/api/firmware", json{{"facts", 3}}.dump(), 422)["path"], "/facts");
    auto ok = s.post("/api/firmware", json{{"facts", fixture("external_chain.P")}}.dump(), 201);
    EXPECT_EQ(ok["fw_name"], "facts");
}

TEST(Service, PersistedSnapshotsAreRestored) {
    TempDir tmp;
    service::ServerConfig c;
    c.persist_dir = tmp / "snapshots";
    std::string root_id, child_id, facts_id;
    {
        Running s(c);
        root_id = s.post("/api/firmware", fixture("netgear_r7800.json"), 201)["id"].get<std::string>();
        child_id = s.post("/api/snapshots/" + root_id + "/whatif", R"({"patched": ["wget"]})", 201)["id"].get<std::string>();
        facts_id = s.post("/api/firmware", json{{"facts", fixture("internal_chain.P")}, {"name", "f6"}}.dump(), 201)["id"].get<std::string>();
    }
    Running s(c);
    EXPECT_EQ(s.server().store().size(), 3u);
    EXPECT_EQ(s.get("/api/snapshots/" + root_id)["metrics"]["potentially_compromised_oss"], 4);
    EXPECT_EQ(s.get("/api/snapshots/" + child_id)["patched"], json({"wget"}));
    EXPECT_EQ(s.get("/api/snapshots/" + facts_id)["fw_name"], "f6");
}

TEST(Service, CorsHeaders) {
    service::ServerConfig c;
    c.cors_origin = "http://localhost:5173";
    Running s(c);
    auto r = s.client().Get("/api/health");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "http://localhost:5173");
}
