#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "firmgraph/logic/ast.hpp"
#include "firmgraph/logic/evaluator.hpp"

namespace firmgraph::logic {

enum class NodeKind { leaf, and_node, or_node };

std::string_view to_string(NodeKind kind) noexcept;
std::optional<NodeKind> node_kind_from_string(std::string_view text) noexcept;

struct ProofNode {
    int id = 0;
    NodeKind kind = NodeKind::leaf;
    std::string label;

    friend bool operator==(const ProofNode&, const ProofNode&) = default;
};

/// LEAF nodes are input facts, AND nodes rule instantiations, OR nodes
/// derived facts. Edges run from premise to conclusion. Node ids are
/// 1-based, dense, and follow a topological order in which ties are taken
/// in label order.
struct ProofGraph {
    std::vector<ProofNode> nodes;
    std::vector<std::pair<int, int>> edges;

    bool empty() const noexcept { return nodes.empty(); }
    const ProofNode& node(int id) const { return nodes.at(static_cast<std::size_t>(id - 1)); }

    friend bool operator==(const ProofGraph&, const ProofGraph&) = default;
};

/// Where a node came from. LEAF and OR nodes carry the fact; AND nodes carry
/// the instantiation and the fact it concludes.
struct NodeOrigin {
    FactId fact = 0;
    std::optional<Derivation> derivation;
};

struct ProofBuild {
    ProofGraph graph;
    std::vector<NodeOrigin> origins;  // indexed by id - 1
};

/// Sub-proof-graph backward-reachable from `goals`.
///
/// Derivation cycles (a fact supported through itself) are cut so the result
/// is acyclic: an instantiation is dropped when one of its premises cannot be
/// derived without its own conclusion; any cycle still left after that is
/// broken by dropping instantiations whose premise was not established in an
/// earlier round than the conclusion. Every goal keeps at least one complete
/// proof.
///
/// Throws NotFoundError when a goal is neither an input nor a derived fact.
ProofGraph build_proof_graph(const Program& program, const DerivationSet& derivations,
                             std::span<const Literal> goals);

ProofBuild build_proof_graph_detailed(const Program& program, const DerivationSet& derivations,
                                      std::span<const FactId> goals);

/// Label used for an AND node: the rule's label, or its text when unlabelled.
std::string rule_label(const Clause& rule);

}  // namespace firmgraph::logic
