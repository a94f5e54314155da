#include "firmgraph/logic/proof_graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "firmgraph/error.hpp"
#include "firmgraph/logic/parser.hpp"

namespace firmgraph::logic {

std::string_view to_string(NodeKind kind) noexcept {
    switch (kind) {
        case NodeKind::leaf: return "LEAF";
        case NodeKind::and_node: return "AND";
        case NodeKind::or_node: return "OR";
    }
    return "LEAF";
}

std::optional<NodeKind> node_kind_from_string(std::string_view text) noexcept {
    if (text == "LEAF") return NodeKind::leaf;
    if (text == "AND") return NodeKind::and_node;
    if (text == "OR") return NodeKind::or_node;
    return std::nullopt;
}

std::string rule_label(const Clause& rule) {
    if (rule.label) return *rule.label;
    Clause bare = rule;
    bare.label.reset();
    auto text = format_clause(bare);
    text.pop_back();  // trailing period
    return text;
}

namespace {

// Iterative Tarjan. Returns the component id of every vertex.
std::vector<std::size_t> strongly_connected(const std::vector<std::vector<std::size_t>>& adj) {
    const std::size_t n = adj.size();
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, unvisited), low(n, 0), comp(n, unvisited);
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> stack;
    std::size_t counter = 0, components = 0;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        std::vector<std::pair<std::size_t, std::size_t>> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            auto& [v, next] = call.back();
            if (next < adj[v].size()) {
                const auto w = adj[v][next++];
                if (index[w] == unvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = components;
                } while (w != v);
                ++components;
            }
            const auto done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    return comp;
}

class Builder {
public:
    Builder(const Program& program, const DerivationSet& ds) : program_(program), ds_(ds) {}

    ProofBuild run(std::span<const FactId> goals) {
        collect_relevant(goals);
        keep_.resize(local_.size());
        for (std::size_t i = 0; i < local_.size(); ++i)
            keep_[i].assign(ds_.derivations(local_[i]).size(), 1);
        drop_self_supported();
        break_remaining_cycles();
        return emit(goals);
    }

private:
    static constexpr std::size_t none = static_cast<std::size_t>(-1);

    std::size_t local(FactId f) const { return local_of_[f]; }

    void collect_relevant(std::span<const FactId> goals) {
        local_of_.assign(ds_.size(), none);
        std::vector<char> seen(ds_.size(), 0);
        std::vector<FactId> work(goals.begin(), goals.end());
        for (auto g : goals) seen[g] = 1;
        while (!work.empty()) {
            const auto f = work.back();
            work.pop_back();
            if (ds_.is_input(f)) continue;
            local_of_[f] = local_.size();
            local_.push_back(f);
            for (const auto& d : ds_.derivations(f))
                for (auto p : d.premises)
                    if (!seen[p]) {
                        seen[p] = 1;
                        work.push_back(p);
                    }
        }
    }

    // Dependency edges conclusion -> derived premise over kept instantiations.
    std::vector<std::vector<std::size_t>> dependency_graph() const {
        std::vector<std::vector<std::size_t>> adj(local_.size());
        for (std::size_t h = 0; h < local_.size(); ++h) {
            const auto ders = ds_.derivations(local_[h]);
            for (std::size_t k = 0; k < ders.size(); ++k) {
                if (!keep_[h][k]) continue;
                for (auto p : ders[k].premises)
                    if (!ds_.is_input(p)) adj[h].push_back(local(p));
            }
            std::sort(adj[h].begin(), adj[h].end());
            adj[h].erase(std::unique(adj[h].begin(), adj[h].end()), adj[h].end());
        }
        return adj;
    }

    static std::vector<std::vector<std::size_t>> group(const std::vector<std::size_t>& comp) {
        std::size_t n = 0;
        for (auto c : comp) n = std::max(n, c + 1);
        std::vector<std::vector<std::size_t>> members(n);
        for (std::size_t v = 0; v < comp.size(); ++v) members[comp[v]].push_back(v);
        return members;
    }

    // Drops an instantiation of h when one of its premises in h's component
    // has no derivation that avoids h.
    void drop_self_supported() {
        const auto adj = dependency_graph();
        const auto comp = strongly_connected(adj);
        for (const auto& members : group(comp)) {
            const bool self_loop =
                members.size() == 1 && std::binary_search(adj[members[0]].begin(), adj[members[0]].end(), members[0]);
            if (members.size() < 2 && !self_loop) continue;
            const auto cid = comp[members[0]];

            // Instantiations of component members, with their in-component premises.
            struct Inst {
                std::size_t head;
                std::size_t index;
                std::vector<std::size_t> inner;
            };
            std::vector<Inst> insts;
            for (auto m : members) {
                const auto ders = ds_.derivations(local_[m]);
                for (std::size_t k = 0; k < ders.size(); ++k) {
                    Inst inst{m, k, {}};
                    for (auto p : ders[k].premises)
                        if (!ds_.is_input(p) && comp[local(p)] == cid) inst.inner.push_back(local(p));
                    insts.push_back(std::move(inst));
                }
            }
            std::map<std::size_t, std::vector<std::size_t>> waiting;  // member -> inst indices
            for (std::size_t i = 0; i < insts.size(); ++i)
                for (auto p : insts[i].inner) waiting[p].push_back(i);

            std::map<std::size_t, std::vector<char>> verdicts;
            for (auto blocked : members) {
                std::set<std::size_t> known;
                std::vector<std::size_t> remaining(insts.size());
                std::vector<std::size_t> queue;
                for (std::size_t i = 0; i < insts.size(); ++i) {
                    const auto& inst = insts[i];
                    const bool uses_blocked =
                        std::find(inst.inner.begin(), inst.inner.end(), blocked) != inst.inner.end();
                    remaining[i] = uses_blocked ? none : inst.inner.size();
                    if (remaining[i] == 0 && inst.head != blocked && known.insert(inst.head).second)
                        queue.push_back(inst.head);
                }
                while (!queue.empty()) {
                    const auto m = queue.back();
                    queue.pop_back();
                    auto it = waiting.find(m);
                    if (it == waiting.end()) continue;
                    for (auto i : it->second) {
                        if (remaining[i] == none || remaining[i] == 0) continue;
                        if (--remaining[i] == 0 && insts[i].head != blocked && known.insert(insts[i].head).second)
                            queue.push_back(insts[i].head);
                    }
                }
                for (std::size_t i = 0; i < insts.size(); ++i) {
                    const auto& inst = insts[i];
                    if (inst.head != blocked) continue;
                    const bool ok = std::all_of(inst.inner.begin(), inst.inner.end(),
                                                [&](std::size_t p) { return p != blocked && known.contains(p); });
                    if (!ok) keep_[inst.head][inst.index] = 0;
                }
            }
        }
    }

    // Whatever cycles survive are cut by keeping only instantiations whose
    // in-component premises were established strictly earlier.
    void break_remaining_cycles() {
        const auto adj = dependency_graph();
        const auto comp = strongly_connected(adj);
        for (const auto& members : group(comp)) {
            if (members.size() < 2) continue;
            const auto cid = comp[members[0]];
            for (auto h : members) {
                const auto ders = ds_.derivations(local_[h]);
                const auto head_rank = ds_.rank(local_[h]);
                for (std::size_t k = 0; k < ders.size(); ++k) {
                    if (!keep_[h][k]) continue;
                    for (auto p : ders[k].premises) {
                        if (ds_.is_input(p) || comp[local(p)] != cid) continue;
                        if (ds_.rank(p) >= head_rank) {
                            keep_[h][k] = 0;
                            break;
                        }
                    }
                }
            }
        }
    }

    ProofBuild emit(std::span<const FactId> goals) {
        struct Pending {
            NodeKind kind;
            std::string label;
            std::string tiebreak;
            NodeOrigin origin;
        };
        std::vector<Pending> nodes;
        std::map<FactId, std::size_t> fact_node;
        std::set<std::pair<std::size_t, std::size_t>> edges;

        std::function<std::size_t(FactId)> visit = [&](FactId f) -> std::size_t {
            if (auto it = fact_node.find(f); it != fact_node.end()) return it->second;
            const auto id = nodes.size();
            fact_node.emplace(f, id);
            nodes.push_back({ds_.is_input(f) ? NodeKind::leaf : NodeKind::or_node, ds_.text(f), {}, {f, {}}});
            if (ds_.is_input(f)) return id;
            const auto h = local(f);
            const auto ders = ds_.derivations(f);
            for (std::size_t k = 0; k < ders.size(); ++k) {
                if (!keep_[h][k]) continue;
                const auto& d = ders[k];
                std::string tiebreak = ds_.text(f);
                for (auto p : d.premises) tiebreak += "\x1f" + ds_.text(p);
                const auto and_id = nodes.size();
                nodes.push_back({NodeKind::and_node, rule_label(program_.clauses().at(d.rule)), std::move(tiebreak),
                                 {f, d}});
                edges.emplace(and_id, id);
                for (auto p : d.premises) edges.emplace(visit(p), and_id);
            }
            return id;
        };
        for (auto g : goals) visit(g);

        // Kahn's algorithm; among ready nodes the smallest (label, kind,
        // tiebreak) goes first.
        const auto n = nodes.size();
        std::vector<std::vector<std::size_t>> out(n);
        std::vector<std::size_t> indegree(n, 0);
        for (auto [a, b] : edges) {
            out[a].push_back(b);
            ++indegree[b];
        }
        using Key = std::tuple<std::string_view, int, std::string_view, std::size_t>;
        auto key = [&](std::size_t v) {
            return Key{nodes[v].label, static_cast<int>(nodes[v].kind), nodes[v].tiebreak, v};
        };
        std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
        for (std::size_t v = 0; v < n; ++v)
            if (indegree[v] == 0) ready.push(key(v));

        std::vector<int> id_of(n, 0);
        ProofBuild result;
        int next_id = 1;
        while (!ready.empty()) {
            const auto v = std::get<3>(ready.top());
            ready.pop();
            id_of[v] = next_id++;
            result.graph.nodes.push_back({id_of[v], nodes[v].kind, nodes[v].label});
            result.origins.push_back(nodes[v].origin);
            for (auto w : out[v])
                if (--indegree[w] == 0) ready.push(key(w));
        }
        if (result.graph.nodes.size() != n) throw Error("internal error: proof graph is cyclic");

        for (auto [a, b] : edges) result.graph.edges.emplace_back(id_of[a], id_of[b]);
        std::sort(result.graph.edges.begin(), result.graph.edges.end());
        return result;
    }

    const Program& program_;
    const DerivationSet& ds_;
    std::vector<FactId> local_;
    std::vector<std::size_t> local_of_;
    std::vector<std::vector<char>> keep_;
};

}  // namespace

ProofBuild build_proof_graph_detailed(const Program& program, const DerivationSet& derivations,
                                      std::span<const FactId> goals) {
    std::vector<FactId> unique(goals.begin(), goals.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (auto g : unique)
        if (g >= derivations.size()) throw NotFoundError(fmt::format("unknown goal fact id {}", g));
    return Builder(program, derivations).run(unique);
}

ProofGraph build_proof_graph(const Program& program, const DerivationSet& derivations,
                             std::span<const Literal> goals) {
    std::vector<FactId> ids;
    for (const auto& g : goals) {
        auto id = derivations.find(g);
        if (!id) throw NotFoundError(fmt::format("goal '{}' is neither an input fact nor derived", format_literal(g)));
        ids.push_back(*id);
    }
    return build_proof_graph_detailed(program, derivations, ids).graph;
}

}  // namespace firmgraph::logic
