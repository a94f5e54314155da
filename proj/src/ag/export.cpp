#include "firmgraph/ag/export.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include "firmgraph/error.hpp"

namespace firmgraph::ag {

using logic::NodeKind;
using nlohmann::ordered_json;

namespace {

const char* shape(NodeKind kind) {
    switch (kind) {
        case NodeKind::leaf: return "box";
        case NodeKind::and_node: return "ellipse";
        case NodeKind::or_node: return "diamond";
    }
    return "box";
}

std::string dot_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out;
}

}  // namespace

std::string export_dot(const logic::ProofGraph& graph) {
    std::string out = "digraph attack_graph {\n";
    for (const auto& n : graph.nodes)
        out += fmt::format("  {} [label=\"{}\", shape={}];\n", n.id, dot_escape(n.label), shape(n.kind));
    for (auto [from, to] : graph.edges) out += fmt::format("  {} -> {};\n", from, to);
    out += "}\n";
    return out;
}

std::string export_json(const logic::ProofGraph& graph) {
    ordered_json doc;
    doc["nodes"] = ordered_json::array();
    for (const auto& n : graph.nodes) {
        ordered_json j;
        j["id"] = n.id;
        j["kind"] = std::string(to_string(n.kind));
        j["label"] = n.label;
        doc["nodes"].push_back(std::move(j));
    }
    doc["edges"] = ordered_json::array();
    for (auto [from, to] : graph.edges) doc["edges"].push_back({from, to});
    return doc.dump(2) + "\n";
}

logic::ProofGraph proof_graph_from_json(std::string_view document) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("/", fmt::format("invalid JSON: {}", e.what()));
    }
    if (!doc.is_object()) throw SchemaError("/", "expected an object");
    auto nodes = doc.find("nodes");
    auto edges = doc.find("edges");
    if (nodes == doc.end() || !nodes->is_array()) throw SchemaError("/nodes", "expected an array");
    if (edges == doc.end() || !edges->is_array()) throw SchemaError("/edges", "expected an array");

    logic::ProofGraph g;
    for (std::size_t i = 0; i < nodes->size(); ++i) {
        const auto& n = (*nodes)[i];
        auto path = fmt::format("/nodes/{}", i);
        if (!n.is_object() || !n.contains("id") || !n["id"].is_number_integer() || !n.contains("kind") ||
            !n["kind"].is_string() || !n.contains("label") || !n["label"].is_string())
            throw SchemaError(path, "expected {id, kind, label}");
        auto kind = logic::node_kind_from_string(n["kind"].get<std::string>());
        if (!kind) throw SchemaError(path + "/kind", "unknown node kind");
        int id = n["id"].get<int>();
        if (id != static_cast<int>(i) + 1) throw SchemaError(path + "/id", "node ids must be 1..n in order");
        g.nodes.push_back({id, *kind, n["label"].get<std::string>()});
    }
    for (std::size_t i = 0; i < edges->size(); ++i) {
        const auto& e = (*edges)[i];
        auto path = fmt::format("/edges/{}", i);
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
            throw SchemaError(path, "expected [from, to]");
        int from = e[0].get<int>();
        int to = e[1].get<int>();
        auto n = static_cast<int>(g.nodes.size());
        if (from < 1 || from > n || to < 1 || to > n) throw SchemaError(path, "edge endpoint is not a node id");
        g.edges.emplace_back(from, to);
    }
    return g;
}

}  // namespace firmgraph::ag
