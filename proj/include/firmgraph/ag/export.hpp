#pragma once

#include <string>
#include <string_view>

#include "firmgraph/logic/proof_graph.hpp"

namespace firmgraph::ag {

/// Graphviz text: LEAF nodes as boxes, AND as ellipses, OR as diamonds,
/// node names are the graph ids.
std::string export_dot(const logic::ProofGraph& graph);

/// `{"nodes": [{"id", "kind", "label"}], "edges": [[from, to]]}`
std::string export_json(const logic::ProofGraph& graph);

/// Inverse of export_json. Throws SchemaError on malformed input.
logic::ProofGraph proof_graph_from_json(std::string_view document);

}  // namespace firmgraph::ag
