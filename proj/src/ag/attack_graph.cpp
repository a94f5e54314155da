#include "firmgraph/ag/attack_graph.hpp"

#include <algorithm>
#include <functional>

#include <fmt/format.h>

#include "firmgraph/error.hpp"
#include "firmgraph/firmware/model.hpp"
#include "firmgraph/logic/parser.hpp"

namespace firmgraph::ag {

using logic::Clause;
using logic::FactId;
using logic::Literal;
using logic::NodeKind;

namespace {

const std::string& arg(const Literal& lit, std::size_t i) { return lit.args.at(i).text; }

bool has_shape(const Literal& lit, std::string_view predicate, std::size_t arity) {
    return lit.predicate == predicate && lit.arity() == arity;
}

std::set<std::string> leaf_binaries(const AttackGraph& ag, std::string_view predicate, std::size_t arity,
                                    std::size_t position) {
    std::set<std::string> out;
    for (const auto& n : ag.proof.nodes) {
        const auto& lit = ag.literals[static_cast<std::size_t>(n.id - 1)];
        if (n.kind == NodeKind::leaf && has_shape(lit, predicate, arity)) out.insert(arg(lit, position));
    }
    return out;
}

// Binary-valued positions of the input predicates.
std::vector<std::string> binaries_of(const Literal& lit) {
    if (has_shape(lit, "dataFlow", 3)) return {arg(lit, 0), arg(lit, 1)};
    if (has_shape(lit, "externalInteraction", 3)) return {arg(lit, 1)};
    if (has_shape(lit, "vulExists", 5)) return {arg(lit, 1)};
    if (has_shape(lit, "bugHyp", 3)) return {arg(lit, 0)};
    return {};
}

}  // namespace

bool is_goal_predicate(std::string_view predicate) noexcept {
    return predicate == vulnerable_predicate || predicate == potentially_vulnerable_predicate;
}

std::vector<Clause> AgInputs::all_facts() const {
    std::vector<Clause> out = topology;
    out.insert(out.end(), vul_facts.begin(), vul_facts.end());
    out.insert(out.end(), bug_facts.begin(), bug_facts.end());
    return out;
}

logic::Program AgInputs::program(const Ruleset& ruleset) const {
    logic::Program p(all_facts());
    p.append(ruleset.rules);
    return p;
}

AgInputs inputs_from_facts(const logic::Program& facts) {
    AgInputs in;
    for (const auto& c : facts.clauses()) {
        if (!c.is_fact()) throw ProgramError(fmt::format("expected facts only, found rule for '{}'", c.head.predicate));
        if (has_shape(c.head, "vulExists", 5)) {
            in.vul_facts.push_back(c);
        } else if (has_shape(c.head, "bugHyp", 3)) {
            in.bug_facts.push_back(c);
        } else {
            in.topology.push_back(c);
        }
    }
    return in;
}

AttackGraph generate_ag(const AgInputs& inputs, const Ruleset& ruleset, const logic::EvalOptions& options) {
    auto program = inputs.program(ruleset);
    auto ds = logic::evaluate(program, options);

    std::vector<FactId> goals;
    for (FactId id = 0; id < ds.size(); ++id) {
        const auto& lit = ds.literal(id);
        if (!ds.is_input(id) && is_goal_predicate(lit.predicate) && lit.arity() == 1) goals.push_back(id);
    }

    AttackGraph ag;
    for (auto id : goals) ag.goals.push_back(ds.text(id));
    std::sort(ag.goals.begin(), ag.goals.end());

    auto build = logic::build_proof_graph_detailed(program, ds, goals);
    ag.proof = std::move(build.graph);
    ag.literals.reserve(ag.proof.nodes.size());
    for (std::size_t i = 0; i < ag.proof.nodes.size(); ++i) {
        const auto& node = ag.proof.nodes[i];
        const auto& origin = build.origins[i];
        ag.literals.push_back(ds.literal(origin.fact));
        if (node.kind == NodeKind::leaf) {
            if (auto src = ds.source_clause(origin.fact)) ag.provenance[node.id] = logic::format_clause(program.clauses()[*src]);
        } else if (node.kind == NodeKind::and_node && origin.derivation) {
            ag.provenance[node.id] = logic::format_clause(program.clauses()[origin.derivation->rule]);
        }
    }
    return ag;
}

std::set<std::string> goal_binaries(const AttackGraph& ag) {
    std::set<std::string> out;
    for (const auto& n : ag.proof.nodes) {
        const auto& lit = ag.literals[static_cast<std::size_t>(n.id - 1)];
        if (n.kind == NodeKind::or_node && is_goal_predicate(lit.predicate) && lit.arity() == 1) out.insert(arg(lit, 0));
    }
    return out;
}

std::set<std::string> attack_point_binaries(const AttackGraph& ag) {
    return leaf_binaries(ag, "externalInteraction", 3, 1);
}

std::set<std::string> hypothesis_binaries(const AttackGraph& ag) { return leaf_binaries(ag, "bugHyp", 3, 0); }

AgMetrics metrics(const AttackGraph& ag) {
    AgMetrics m;
    for (const auto& n : ag.proof.nodes) {
        if (n.kind != NodeKind::leaf) continue;
        const auto& lit = ag.literals[static_cast<std::size_t>(n.id - 1)];
        if (has_shape(lit, "externalInteraction", 3)) ++m.attack_points;
        if (has_shape(lit, "bugHyp", 3)) ++m.potentially_compromised_oss;
    }
    auto known = attack_point_binaries(ag);
    auto hyp = hypothesis_binaries(ag);
    known.insert(hyp.begin(), hyp.end());
    for (const auto& b : goal_binaries(ag))
        if (!known.contains(b)) ++m.vulnerable_binaries;
    return m;
}

std::vector<AttackPath> enumerate_paths(const AgInputs& inputs, const AttackGraph& ag, std::string_view target,
                                        std::size_t cap) {
    auto goal = firmware::sanitize_name(target);
    auto goals = goal_binaries(ag);
    if (!goals.contains(goal)) throw NotFoundError(fmt::format("'{}' is not a vulnerable binary of the attack graph", target));

    std::set<std::string> vulnerable;
    for (const auto& n : ag.proof.nodes) {
        const auto& lit = ag.literals[static_cast<std::size_t>(n.id - 1)];
        if (n.kind == NodeKind::or_node && has_shape(lit, vulnerable_predicate, 1)) vulnerable.insert(arg(lit, 0));
    }
    auto external = attack_point_binaries(ag);
    auto internal = hypothesis_binaries(ag);

    // dst -> src -> flow types, for hops into vulnerable binaries.
    std::map<std::string, std::map<std::string, std::set<std::string>>> preds;
    for (const auto& c : inputs.topology) {
        if (!has_shape(c.head, "dataFlow", 3)) continue;
        const auto& dst = arg(c.head, 1);
        if (vulnerable.contains(dst)) preds[dst][arg(c.head, 0)].insert(arg(c.head, 2));
    }

    std::vector<AttackPath> paths;
    std::vector<std::string> stack{goal};
    std::set<std::string> on_path{goal};
    std::size_t limit = 0;
    std::vector<AttackPath> level;
    // Backward from the target, collecting paths of exactly `limit` binaries.
    std::function<void()> walk = [&]() {
        const auto& head = stack.back();
        if (stack.size() == limit) {
            if (!external.contains(head) && !internal.contains(head)) return;
            AttackPath p;
            p.binaries.assign(stack.rbegin(), stack.rend());
            for (std::size_t i = 0; i + 1 < p.binaries.size(); ++i) {
                const auto& types = preds[p.binaries[i + 1]][p.binaries[i]];
                std::string joined;
                for (const auto& t : types) joined += (joined.empty() ? "" : "|") + t;
                p.flows.push_back(joined);
            }
            p.internal_entry = !external.contains(head);
            level.push_back(std::move(p));
            return;
        }
        if (!vulnerable.contains(head)) return;
        auto it = preds.find(head);
        if (it == preds.end()) return;
        for (const auto& [src, types] : it->second) {
            if (on_path.contains(src)) continue;
            stack.push_back(src);
            on_path.insert(src);
            walk();
            on_path.erase(src);
            stack.pop_back();
        }
    };
    std::size_t universe = preds.size() + 1;
    for (limit = 1; limit <= universe && paths.size() < cap; ++limit) {
        level.clear();
        walk();
        std::sort(level.begin(), level.end(),
                  [](const AttackPath& a, const AttackPath& b) { return a.binaries < b.binaries; });
        for (auto& p : level) {
            if (paths.size() == cap) break;
            paths.push_back(std::move(p));
        }
    }
    return paths;
}

AgInputs apply_patch(const AgInputs& inputs, const std::set<std::string>& patched, std::vector<std::string>* unknown) {
    std::set<std::string> names;
    for (const auto& p : patched) names.insert(firmware::sanitize_name(p));

    if (unknown) {
        std::set<std::string> present;
        for (const auto& c : inputs.all_facts())
            for (auto& b : binaries_of(c.head)) present.insert(b);
        for (const auto& p : patched)
            if (!present.contains(firmware::sanitize_name(p))) unknown->push_back(p);
    }

    AgInputs out;
    out.topology = inputs.topology;
    for (const auto& c : inputs.vul_facts)
        if (!(has_shape(c.head, "vulExists", 5) && names.contains(arg(c.head, 1)))) out.vul_facts.push_back(c);
    for (const auto& c : inputs.bug_facts)
        if (!(has_shape(c.head, "bugHyp", 3) && names.contains(arg(c.head, 0)))) out.bug_facts.push_back(c);
    return out;
}

WhatIf whatif_patch(const AgInputs& inputs, const Ruleset& ruleset, const std::set<std::string>& patched,
                    const logic::EvalOptions& options) {
    WhatIf out;
    auto reduced = apply_patch(inputs, patched, &out.unknown);
    out.graph = generate_ag(reduced, ruleset, options);
    return out;
}

std::set<std::string> node_keys(const logic::ProofGraph& graph) {
    std::map<int, std::vector<std::string>> premises;
    std::map<int, std::string> conclusion;
    for (auto [from, to] : graph.edges) {
        const auto& a = graph.node(from);
        const auto& b = graph.node(to);
        if (b.kind == NodeKind::and_node) premises[to].push_back(std::string(to_string(a.kind)) + ":" + a.label);
        if (a.kind == NodeKind::and_node) conclusion[from] = b.label;
    }
    std::set<std::string> out;
    for (const auto& n : graph.nodes) {
        std::string key = std::string(to_string(n.kind)) + "\x1f" + n.label;
        if (n.kind == NodeKind::and_node) {
            auto& prem = premises[n.id];
            std::sort(prem.begin(), prem.end());
            key += "\x1f" + conclusion[n.id];
            for (const auto& p : prem) key += "\x1f" + p;
        }
        out.insert(std::move(key));
    }
    return out;
}

GraphDiff diff(const AttackGraph& before, const AttackGraph& after) {
    GraphDiff d;
    auto a = node_keys(before.proof);
    auto b = node_keys(after.proof);
    for (const auto& k : a)
        if (!b.contains(k)) ++d.removed_nodes;
    for (const auto& k : b)
        if (!a.contains(k)) ++d.added_nodes;
    d.before = metrics(before);
    d.after = metrics(after);
    return d;
}

}  // namespace firmgraph::ag
