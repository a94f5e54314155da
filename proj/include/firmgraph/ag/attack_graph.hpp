#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "firmgraph/ag/ruleset.hpp"
#include "firmgraph/logic/ast.hpp"
#include "firmgraph/logic/evaluator.hpp"
#include "firmgraph/logic/proof_graph.hpp"

namespace firmgraph::ag {

inline constexpr std::string_view vulnerable_predicate = "vulnerableSoftware";
inline constexpr std::string_view potentially_vulnerable_predicate = "potentiallyVulnerableSoftware";

bool is_goal_predicate(std::string_view predicate) noexcept;

/// Input facts of one firmware: topology (dataFlow, externalInteraction),
/// vulnerabilities (vulExists) and OSS hypotheses (bugHyp).
struct AgInputs {
    std::vector<logic::Clause> topology;
    std::vector<logic::Clause> vul_facts;
    std::vector<logic::Clause> bug_facts;

    std::vector<logic::Clause> all_facts() const;
    logic::Program program(const Ruleset& ruleset) const;
};

/// Splits a facts-only program into AgInputs: vulExists and bugHyp facts go
/// to their own lists, every other fact to topology. Throws ProgramError if
/// the program contains a rule.
AgInputs inputs_from_facts(const logic::Program& facts);

struct AttackGraph {
    logic::ProofGraph proof;
    // Per node (index id - 1): the fact for LEAF/OR nodes, the concluded
    // fact for AND nodes.
    std::vector<logic::Literal> literals;
    // Node id to the text of the input clause or rule it stems from.
    std::map<int, std::string> provenance;
    // Canonical texts of the derived goal literals, sorted.
    std::vector<std::string> goals;

    bool empty() const noexcept { return proof.empty(); }
};

/// Evaluates facts plus rules and keeps the proof graph of every derived
/// vulnerableSoftware/potentiallyVulnerableSoftware literal. An empty graph
/// means the firmware has no attack graph.
AttackGraph generate_ag(const AgInputs& inputs, const Ruleset& ruleset, const logic::EvalOptions& options = {});

struct AgMetrics {
    std::size_t attack_points = 0;
    std::size_t potentially_compromised_oss = 0;
    // Goal binaries that are neither attack points nor OSS hypotheses.
    std::size_t vulnerable_binaries = 0;

    friend bool operator==(const AgMetrics&, const AgMetrics&) = default;
};

AgMetrics metrics(const AttackGraph& ag);

/// Binaries named by goal literals.
std::set<std::string> goal_binaries(const AttackGraph& ag);
/// Binaries of externalInteraction LEAF nodes.
std::set<std::string> attack_point_binaries(const AttackGraph& ag);
/// Binaries of bugHyp LEAF nodes.
std::set<std::string> hypothesis_binaries(const AttackGraph& ag);

struct AttackPath {
    std::vector<std::string> binaries;
    // flows[i] is the flow type of binaries[i] -> binaries[i + 1]; several
    // types of one hop are joined with '|'.
    std::vector<std::string> flows;
    // Entry is an OSS hypothesis rather than an attack point.
    bool internal_entry = false;

    friend bool operator==(const AttackPath&, const AttackPath&) = default;
};

/// Simple dataFlow paths from an attack point or OSS hypothesis to `target`
/// whose every later binary is vulnerableSoftware. Shortest first, then
/// lexicographic; at most `cap` paths.
///
/// Throws NotFoundError when `target` is not a goal binary.
std::vector<AttackPath> enumerate_paths(const AgInputs& inputs, const AttackGraph& ag, std::string_view target,
                                        std::size_t cap = 10'000);

/// Inputs without the vulExists and bugHyp facts of `patched` binaries.
/// Names that occur in no fact are collected in `unknown`.
AgInputs apply_patch(const AgInputs& inputs, const std::set<std::string>& patched,
                     std::vector<std::string>* unknown = nullptr);

struct WhatIf {
    AttackGraph graph;
    std::vector<std::string> unknown;
};

WhatIf whatif_patch(const AgInputs& inputs, const Ruleset& ruleset, const std::set<std::string>& patched,
                    const logic::EvalOptions& options = {});

/// Id-independent node identity: kind and label, plus premises and
/// conclusion for AND nodes.
std::set<std::string> node_keys(const logic::ProofGraph& graph);

struct GraphDiff {
    std::size_t removed_nodes = 0;
    std::size_t added_nodes = 0;
    AgMetrics before;
    AgMetrics after;
};

GraphDiff diff(const AttackGraph& before, const AttackGraph& after);

}  // namespace firmgraph::ag
