#include "firmgraph/service/server.hpp"

#include <httplib.h>
#include <json.hpp>

#include <fmt/format.h>

#include "firmgraph/ag/export.hpp"
#include "firmgraph/error.hpp"
#include "firmgraph/logic/parser.hpp"
#include "firmgraph/util/log.hpp"

namespace firmgraph::service {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kJson = "application/json";

ordered_json metrics_object(const ag::AgMetrics& m) {
    return {{"attack_points", m.attack_points},
            {"potentially_compromised_oss", m.potentially_compromised_oss},
            {"vulnerable_binaries", m.vulnerable_binaries}};
}

ordered_json metrics_delta(const ag::AgMetrics& a, const ag::AgMetrics& b) {
    auto d = [](std::size_t x, std::size_t y) { return static_cast<long long>(y) - static_cast<long long>(x); };
    return {{"attack_points", d(a.attack_points, b.attack_points)},
            {"potentially_compromised_oss", d(a.potentially_compromised_oss, b.potentially_compromised_oss)},
            {"vulnerable_binaries", d(a.vulnerable_binaries, b.vulnerable_binaries)}};
}

ordered_json summary(const Snapshot& s) {
    ordered_json j;
    j["id"] = s.id;
    j["parent"] = s.parent ? ordered_json(*s.parent) : ordered_json(nullptr);
    j["fw_name"] = s.fw_name;
    j["ruleset"] = std::string(ag::to_string(s.ruleset));
    j["patched"] = s.patched;
    j["metrics"] = metrics_object(s.metrics);
    j["goal_binaries"] = ag::goal_binaries(s.graph);
    j["node_count"] = s.graph.proof.nodes.size();
    j["edge_count"] = s.graph.proof.edges.size();
    j["warnings"] = s.warnings;
    return j;
}

void reply(httplib::Response& res, int status, const ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", kJson);
}

void error_reply(httplib::Response& res, int status, const std::string& message, const std::string& path = {}) {
    ordered_json body;
    body["error"] = message;
    if (!path.empty()) body["path"] = path;
    reply(res, status, body);
}

std::vector<risk::BinaryRiskRow> rows_for(const ag::AttackGraph& graph, const std::vector<vuln::VulnMatch>& matches,
                                          const vuln::ExploitIntel& intel) {
    risk::FirmwareRiskInput in{&graph, &matches};
    return risk::binary_risk_table(std::span(&in, 1), intel);
}

}  // namespace

struct Server::Impl {
    httplib::Server http;
};

Server::Server(ServerConfig config, std::shared_ptr<const IntelSources> intel, std::string intel_digest)
    : impl_(std::make_unique<Impl>()),
      config_(std::move(config)),
      intel_(std::move(intel)),
      intel_digest_(std::move(intel_digest)),
      store_(config_.persist_dir) {
    auto& http = impl_->http;

    if (intel_) {
        for (const auto& p : store_.load_persisted()) {
            try {
                auto root = p.facts_text.empty() ? create_snapshot(p.firmware_document, p.versions_text)
                                                 : create_facts_snapshot(p.fw_name, p.facts_text);
                if (!p.patched.empty()) create_whatif(*root, p.patched);
            } catch (const std::exception& e) {
                util::logger().warn("snapshot_restore_failed", {{"id", p.id}, {"error", e.what()}});
            }
        }
    }

    if (!config_.cors_origin.empty()) {
        http.set_default_headers({{"Access-Control-Allow-Origin", config_.cors_origin},
                                  {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                  {"Access-Control-Allow-Headers", "Content-Type"}});
        http.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    }

    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        util::logger().error("request_failed", {{"error", what}});
        error_reply(res, 500, what);
    });

    http.Get("/api/health", [](const httplib::Request&, httplib::Response& res) { reply(res, 200, {{"status", "ok"}}); });

    http.Post("/api/firmware", [this](const httplib::Request& req, httplib::Response& res) {
        if (!intel_) return error_reply(res, 503, "vulnerability intelligence is not available");
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::parse_error& e) {
            return error_reply(res, 422, fmt::format("invalid JSON: {}", e.what()), "/");
        }
        if (body.is_object() && body.contains("facts")) {
            if (!body["facts"].is_string()) return error_reply(res, 422, "expected a string", "/facts");
            std::string name = "facts";
            if (body.contains("name")) {
                if (!body["name"].is_string()) return error_reply(res, 422, "expected a string", "/name");
                name = body["name"].get<std::string>();
            }
            try {
                auto snap = create_facts_snapshot(name, body["facts"].get<std::string>());
                return reply(res, 201, summary(*snap));
            } catch (const ParseError& e) {
                return error_reply(res, 422, e.what(), fmt::format("/facts:{}:{}", e.line(), e.column()));
            } catch (const ProgramError& e) {
                return error_reply(res, 422, e.what(), "/facts");
            }
        }
        std::string document = req.body;
        std::string versions;
        if (body.is_object() && body.contains("firmware")) {
            if (!body["firmware"].is_object()) return error_reply(res, 422, "expected an object", "/firmware");
            document = body["firmware"].dump();
            if (body.contains("versions")) {
                if (!body["versions"].is_string()) return error_reply(res, 422, "expected a string", "/versions");
                versions = body["versions"].get<std::string>();
            }
        }
        try {
            auto snap = create_snapshot(document, versions);
            reply(res, 201, summary(*snap));
        } catch (const SchemaError& e) {
            error_reply(res, 422, e.what(), e.path());
        }
    });

    http.Get(R"(/api/snapshots/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
        auto snap = store_.get(req.matches[1]);
        if (!snap) return error_reply(res, 404, "unknown snapshot");
        reply(res, 200, summary(*snap));
    });

    http.Get(R"(/api/snapshots/([0-9a-f]+)/graph)", [this](const httplib::Request& req, httplib::Response& res) {
        auto snap = store_.get(req.matches[1]);
        if (!snap) return error_reply(res, 404, "unknown snapshot");
        auto format = req.has_param("format") ? req.get_param_value("format") : "json";
        if (format == "json") {
            res.set_content(ag::export_json(snap->graph.proof), kJson);
        } else if (format == "dot") {
            res.set_content(ag::export_dot(snap->graph.proof), "text/vnd.graphviz");
        } else {
            return error_reply(res, 400, fmt::format("unknown format '{}'", format));
        }
        res.status = 200;
    });

    http.Post(R"(/api/snapshots/([0-9a-f]+)/whatif)", [this](const httplib::Request& req, httplib::Response& res) {
        auto parent = store_.get(req.matches[1]);
        if (!parent) return error_reply(res, 404, "unknown snapshot");
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::parse_error& e) {
            return error_reply(res, 422, fmt::format("invalid JSON: {}", e.what()), "/");
        }
        if (!body.is_object() || !body.contains("patched") || !body["patched"].is_array())
            return error_reply(res, 422, "expected an array of binary names", "/patched");
        std::set<std::string> patched;
        for (std::size_t i = 0; i < body["patched"].size(); ++i) {
            const auto& v = body["patched"][i];
            if (!v.is_string()) return error_reply(res, 422, "expected a string", fmt::format("/patched/{}", i));
            patched.insert(v.get<std::string>());
        }
        std::vector<std::string> unknown;
        auto child = create_whatif(*parent, patched, &unknown);
        auto d = ag::diff(parent->graph, child->graph);
        auto out = summary(*child);
        out["removed_nodes"] = d.removed_nodes;
        out["added_nodes"] = d.added_nodes;
        out["metrics_delta"] = metrics_delta(parent->metrics, child->metrics);
        out["unknown"] = unknown;
        reply(res, 201, out);
    });

    http.Get(R"(/api/snapshots/([0-9a-f]+)/risk)", [this](const httplib::Request& req, httplib::Response& res) {
        auto snap = store_.get(req.matches[1]);
        if (!snap) return error_reply(res, 404, "unknown snapshot");
        res.status = 200;
        res.set_content(risk::risk_table_json(snap->risk_rows), kJson);
    });

    http.Get(R"(/api/snapshots/([0-9a-f]+)/paths)", [this](const httplib::Request& req, httplib::Response& res) {
        auto snap = store_.get(req.matches[1]);
        if (!snap) return error_reply(res, 404, "unknown snapshot");
        if (!req.has_param("target")) return error_reply(res, 400, "missing target parameter");
        auto inputs = ag::apply_patch(snap->base_inputs, snap->patched);
        try {
            auto paths = ag::enumerate_paths(inputs, snap->graph, req.get_param_value("target"));
            auto arr = ordered_json::array();
            for (const auto& p : paths)
                arr.push_back({{"binaries", p.binaries}, {"flows", p.flows}, {"entry", p.internal_entry ? "internal" : "external"}});
            reply(res, 200, arr);
        } catch (const NotFoundError& e) {
            error_reply(res, 404, e.what());
        }
    });

    if (config_.ui_dir) http.set_mount_point("/", config_.ui_dir->string());
}

Server::~Server() { stop(); }

std::shared_ptr<const Snapshot> Server::create_snapshot(const std::string& firmware_document,
                                                        const std::string& versions_text) {
    if (!intel_) throw Error("vulnerability intelligence is not available");
    auto fw = firmware::load_firmware_graph(firmware_document);
    std::optional<firmware::BinaryInventory> versions;
    if (!versions_text.empty()) {
        try {
            versions = firmware::load_version_list(versions_text);
        } catch (const SchemaError& e) {
            throw e.within("versions");
        }
    }
    Snapshot s;
    s.inputs_digest = sha256_hex(firmware_document + '\0' + versions_text + '\0' + intel_digest_);
    s.ruleset = config_.ruleset;
    s.id = snapshot_id(s.inputs_digest, s.ruleset, {}, std::nullopt);
    if (auto existing = store_.get(s.id)) return existing;

    auto analysis = analyze_firmware(std::move(fw), versions, intel_->db, AnalysisOptions{config_.ruleset, config_.eval});
    s.fw_name = analysis.fw.fw_name;
    s.firmware_document = firmware_document;
    s.versions_text = versions_text;
    s.base_inputs = std::move(analysis.inputs);
    s.matches = std::move(analysis.matches);
    s.warnings = std::move(analysis.warnings);
    s.graph = std::move(analysis.graph);
    s.metrics = analysis.metrics;
    s.risk_rows = rows_for(s.graph, s.matches, intel_->exploit);
    return store_.put(std::move(s));
}

std::shared_ptr<const Snapshot> Server::create_facts_snapshot(const std::string& name, const std::string& facts_text) {
    if (!intel_) throw Error("vulnerability intelligence is not available");
    auto program = logic::parse_program(facts_text);
    Snapshot s;
    s.inputs_digest = sha256_hex(std::string("facts") + '\0' + name + '\0' + facts_text + '\0' + intel_digest_);
    s.ruleset = config_.ruleset;
    s.id = snapshot_id(s.inputs_digest, s.ruleset, {}, std::nullopt);
    if (auto existing = store_.get(s.id)) return existing;

    auto analysis = analyze_facts(name, program, AnalysisOptions{config_.ruleset, config_.eval});
    s.fw_name = name;
    s.facts_text = facts_text;
    s.base_inputs = std::move(analysis.inputs);
    s.matches = std::move(analysis.matches);
    s.graph = std::move(analysis.graph);
    s.metrics = analysis.metrics;
    s.risk_rows = rows_for(s.graph, s.matches, intel_->exploit);
    return store_.put(std::move(s));
}

std::shared_ptr<const Snapshot> Server::create_whatif(const Snapshot& parent, const std::set<std::string>& patched,
                                                      std::vector<std::string>* unknown) {
    Snapshot s;
    s.parent = parent.id;
    s.inputs_digest = parent.inputs_digest;
    s.ruleset = parent.ruleset;
    s.patched = patched;
    s.id = snapshot_id(s.inputs_digest, s.ruleset, s.patched, s.parent);

    std::vector<std::string> missing;
    auto result = ag::whatif_patch(parent.base_inputs, ag::shipped_ruleset(parent.ruleset), patched, config_.eval);
    missing = std::move(result.unknown);
    if (unknown) *unknown = missing;
    if (auto existing = store_.get(s.id)) return existing;

    s.fw_name = parent.fw_name;
    s.firmware_document = parent.firmware_document;
    s.versions_text = parent.versions_text;
    s.facts_text = parent.facts_text;
    s.base_inputs = parent.base_inputs;
    s.matches = parent.matches;
    s.warnings = parent.warnings;
    for (const auto& name : missing) s.warnings.push_back(fmt::format("patched binary '{}' is not in the firmware", name));
    s.graph = std::move(result.graph);
    s.metrics = ag::metrics(s.graph);
    s.risk_rows = rows_for(s.graph, s.matches, intel_ ? intel_->exploit : vuln::ExploitIntel{});
    return store_.put(std::move(s));
}

bool Server::listen() {
    util::logger().info("serve", {{"host", config_.host}, {"port", config_.port}});
    return impl_->http.listen(config_.host, config_.port);
}

int Server::bind() {
    if (config_.port == 0) return impl_->http.bind_to_any_port(config_.host);
    return impl_->http.bind_to_port(config_.host, config_.port) ? config_.port : -1;
}

bool Server::serve() { return impl_->http.listen_after_bind(); }

void Server::stop() {
    if (impl_) impl_->http.stop();
}

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace firmgraph::service
