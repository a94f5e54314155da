#include "firmgraph/logic/evaluator.hpp"

#include <algorithm>
#include <unordered_map>

#include <fmt/format.h>

#include "firmgraph/error.hpp"
#include "firmgraph/logic/parser.hpp"

namespace firmgraph::logic {

std::string canonical_text(const Literal& ground) {
    std::string out = ground.predicate;
    if (ground.args.empty()) return out;
    out.push_back('(');
    for (std::size_t i = 0; i < ground.args.size(); ++i) {
        if (i) out += ", ";
        out += canonical_constant(ground.args[i].text);
    }
    out.push_back(')');
    return out;
}

std::optional<std::size_t> DerivationSet::source_clause(FactId id) const {
    if (!is_input(id)) return std::nullopt;
    return input_clauses_.at(id);
}

std::optional<FactId> DerivationSet::find(const Literal& ground) const {
    if (!ground.is_ground()) return std::nullopt;
    return find(canonical_text(ground));
}

std::optional<FactId> DerivationSet::find(std::string_view text) const {
    if (auto it = by_text_.find(text); it != by_text_.end()) return it->second;
    return std::nullopt;
}

std::vector<FactId> DerivationSet::with_predicate(std::string_view predicate) const {
    std::vector<FactId> out;
    for (FactId id = 0; id < literals_.size(); ++id)
        if (literals_[id].predicate == predicate) out.push_back(id);
    return out;
}

std::vector<std::string> DerivationSet::canonical() const {
    std::vector<std::string> out(texts_.begin(), texts_.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> DerivationSet::canonical_derived() const {
    std::vector<std::string> out(texts_.begin() + static_cast<std::ptrdiff_t>(input_count_), texts_.end());
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

using Symbol = std::uint32_t;
using Tuple = std::vector<Symbol>;

struct TupleHash {
    std::size_t operator()(const Tuple& t) const noexcept {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (Symbol s : t) {
            h ^= s + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};

// Argument slot of a compiled body or head literal.
struct Slot {
    enum class Kind { constant, variable, wildcard } kind;
    Symbol value = 0;  // constant symbol or variable index
};

struct CompiledLiteral {
    std::size_t relation = 0;
    std::vector<Slot> slots;
};

struct CompiledRule {
    std::size_t clause = 0;
    CompiledLiteral head;
    std::vector<CompiledLiteral> body;
    std::size_t variable_count = 0;
};

// How one body literal is matched at a given point of a join.
struct Step {
    std::size_t body_index = 0;
    std::uint64_t bound_mask = 0;          // argument positions looked up through the index
    std::vector<std::size_t> key_positions;
    std::vector<std::pair<std::size_t, std::size_t>> binds;      // (position, variable)
    std::vector<std::pair<std::size_t, std::size_t>> same_as;    // (position, earlier position)
};

struct Plan {
    std::size_t delta_index = 0;
    std::vector<Step> steps;
};

class Index {
public:
    void add(const Tuple& tuple, std::uint32_t position, const std::vector<std::size_t>& key_positions) {
        Tuple key;
        key.reserve(key_positions.size());
        for (auto p : key_positions) key.push_back(tuple[p]);
        buckets_[std::move(key)].push_back(position);
    }
    const std::vector<std::uint32_t>* lookup(const Tuple& key) const {
        auto it = buckets_.find(key);
        return it == buckets_.end() ? nullptr : &it->second;
    }

private:
    std::unordered_map<Tuple, std::vector<std::uint32_t>, TupleHash> buckets_;
};

struct Relation {
    std::string name;
    std::size_t arity = 0;
    std::vector<FactId> facts;  // position -> fact id
    std::unordered_map<Tuple, FactId, TupleHash> lookup;
    std::map<std::uint64_t, std::pair<std::vector<std::size_t>, Index>> indexes;

    Index& index_for(std::uint64_t mask, const std::vector<std::size_t>& positions,
                     const std::vector<Tuple>& tuples) {
        auto [it, inserted] = indexes.try_emplace(mask);
        if (inserted) {
            it->second.first = positions;
            for (std::uint32_t pos = 0; pos < facts.size(); ++pos)
                it->second.second.add(tuples[facts[pos]], pos, positions);
        }
        return it->second.second;
    }
};

}  // namespace

class Evaluator {
public:
    Evaluator(const Program& program, const EvalOptions& options) : program_(program), options_(options) {}

    DerivationSet run() {
        load_facts();
        compile_rules();
        fixpoint();
        return finish();
    }

private:
    Symbol intern(const std::string& text) {
        auto [it, inserted] = symbols_.try_emplace(text, static_cast<Symbol>(names_.size()));
        if (inserted) names_.push_back(text);
        return it->second;
    }

    std::size_t relation(const std::string& name, std::size_t arity) {
        auto [it, inserted] = relation_ids_.try_emplace(name, relations_.size());
        if (inserted) {
            relations_.emplace_back();
            relations_.back().name = name;
            relations_.back().arity = arity;
        }
        return it->second;
    }

    // Returns the fact id and whether it was new.
    std::pair<FactId, bool> insert(std::size_t rel, Tuple tuple, std::uint32_t round) {
        auto& r = relations_[rel];
        if (auto it = r.lookup.find(tuple); it != r.lookup.end()) return {it->second, false};
        const auto id = static_cast<FactId>(tuples_.size());
        const auto position = static_cast<std::uint32_t>(r.facts.size());
        r.lookup.emplace(tuple, id);
        r.facts.push_back(id);
        for (auto& [mask, entry] : r.indexes) entry.second.add(tuple, position, entry.first);
        tuples_.push_back(std::move(tuple));
        fact_relation_.push_back(rel);
        ranks_.push_back(round);
        derivations_.emplace_back();
        return {id, true};
    }

    void load_facts() {
        const auto& clauses = program_.clauses();
        for (std::size_t i = 0; i < clauses.size(); ++i) {
            const auto& c = clauses[i];
            if (!c.is_fact()) continue;
            Tuple t;
            for (const auto& arg : c.head.args) t.push_back(intern(arg.text));
            auto [id, fresh] = insert(relation(c.head.predicate, c.head.arity()), std::move(t), 0);
            if (fresh) input_clauses_.push_back(i);
        }
        input_count_ = tuples_.size();
    }

    CompiledLiteral compile(const Literal& lit, std::map<std::string, std::size_t>& vars) {
        CompiledLiteral out;
        out.relation = relation(lit.predicate, lit.arity());
        for (const auto& t : lit.args) {
            switch (t.kind) {
                case Term::Kind::constant:
                    out.slots.push_back({Slot::Kind::constant, intern(t.text)});
                    break;
                case Term::Kind::variable: {
                    auto [it, _] = vars.try_emplace(t.text, vars.size());
                    out.slots.push_back({Slot::Kind::variable, static_cast<Symbol>(it->second)});
                    break;
                }
                case Term::Kind::wildcard: out.slots.push_back({Slot::Kind::wildcard, 0}); break;
            }
        }
        return out;
    }

    void compile_rules() {
        const auto& clauses = program_.clauses();
        for (std::size_t i = 0; i < clauses.size(); ++i) {
            const auto& c = clauses[i];
            if (c.is_fact()) continue;
            CompiledRule rule;
            rule.clause = i;
            std::map<std::string, std::size_t> vars;
            for (const auto& lit : c.body) rule.body.push_back(compile(lit, vars));
            rule.head = compile(c.head, vars);
            rule.variable_count = vars.size();
            std::vector<Plan> plans;
            for (std::size_t d = 0; d < rule.body.size(); ++d) plans.push_back(plan(rule, d));
            rules_.push_back(std::move(rule));
            plans_.push_back(std::move(plans));
        }
    }

    // The delta literal is matched first, the rest in body order.
    static Plan plan(const CompiledRule& rule, std::size_t delta) {
        Plan p;
        p.delta_index = delta;
        std::vector<std::size_t> order{delta};
        for (std::size_t i = 0; i < rule.body.size(); ++i)
            if (i != delta) order.push_back(i);

        std::vector<bool> bound(rule.variable_count, false);
        for (auto bi : order) {
            Step step;
            step.body_index = bi;
            std::map<std::size_t, std::size_t> first_pos;  // variable -> position in this literal
            const auto& slots = rule.body[bi].slots;
            for (std::size_t pos = 0; pos < slots.size(); ++pos) {
                const auto& s = slots[pos];
                if (s.kind == Slot::Kind::constant ||
                    (s.kind == Slot::Kind::variable && bound[s.value])) {
                    if (pos < 64) {
                        step.bound_mask |= (1ULL << pos);
                        step.key_positions.push_back(pos);
                    }
                } else if (s.kind == Slot::Kind::variable) {
                    if (auto it = first_pos.find(s.value); it != first_pos.end()) {
                        step.same_as.emplace_back(pos, it->second);
                    } else {
                        first_pos.emplace(s.value, pos);
                        step.binds.emplace_back(pos, s.value);
                    }
                }
            }
            for (auto& [pos, var] : step.binds) bound[var] = true;
            p.steps.push_back(std::move(step));
        }
        return p;
    }

    void fixpoint() {
        const std::size_t n = relations_.size();
        std::vector<std::uint32_t> delta_begin(n, 0), delta_end(n, 0);
        for (std::size_t r = 0; r < n; ++r) delta_end[r] = static_cast<std::uint32_t>(relations_[r].facts.size());

        for (std::uint32_t round = 1;; ++round) {
            for (std::size_t ri = 0; ri < rules_.size(); ++ri) {
                const auto& rule = rules_[ri];
                for (const auto& p : plans_[ri]) {
                    const auto drel = rule.body[p.delta_index].relation;
                    if (delta_begin[drel] == delta_end[drel]) continue;
                    run_plan(rule, p, delta_begin, delta_end, round);
                }
            }
            bool changed = false;
            for (std::size_t r = 0; r < n; ++r) {
                delta_begin[r] = delta_end[r];
                delta_end[r] = static_cast<std::uint32_t>(relations_[r].facts.size());
                changed = changed || delta_begin[r] != delta_end[r];
            }
            if (!changed) break;
        }
    }

    void run_plan(const CompiledRule& rule, const Plan& p, const std::vector<std::uint32_t>& delta_begin,
                  const std::vector<std::uint32_t>& delta_end, std::uint32_t round) {
        std::vector<Symbol> env(rule.variable_count, 0);
        std::vector<FactId> chosen(rule.body.size(), 0);

        // Resolve per-step ranges and indexes up front.
        struct Resolved {
            std::uint32_t begin, end;
            Index* index;
        };
        std::vector<Resolved> resolved;
        for (const auto& step : p.steps) {
            const auto& lit = rule.body[step.body_index];
            auto& rel = relations_[lit.relation];
            std::uint32_t begin = 0, end = delta_end[lit.relation];
            if (step.body_index == p.delta_index)
                begin = delta_begin[lit.relation];
            else if (step.body_index < p.delta_index)
                end = delta_begin[lit.relation];
            Index* idx = step.bound_mask ? &rel.index_for(step.bound_mask, step.key_positions, tuples_) : nullptr;
            resolved.push_back({begin, end, idx});
        }

        auto emit = [&] {
            Tuple head;
            head.reserve(rule.head.slots.size());
            for (const auto& s : rule.head.slots)
                head.push_back(s.kind == Slot::Kind::constant ? s.value : env[s.value]);
            auto [id, fresh] = insert(rule.head.relation, std::move(head), round);
            if (fresh && tuples_.size() - input_count_ > options_.max_derived_facts)
                throw ResourceLimitError(fmt::format("derived-fact cap of {} exceeded; the program is runaway",
                                                     options_.max_derived_facts));
            if (id < input_count_) return;
            derivations_[id].push_back(Derivation{rule.clause, chosen, round});
        };

        auto match = [&](auto&& self, std::size_t depth) -> void {
            if (depth == p.steps.size()) {
                emit();
                return;
            }
            const auto& step = p.steps[depth];
            const auto& lit = rule.body[step.body_index];
            const auto& range = resolved[depth];
            const auto& rel = relations_[lit.relation];

            auto try_position = [&](std::uint32_t pos) {
                const FactId id = rel.facts[pos];
                const Tuple& t = tuples_[id];
                for (auto [a, b] : step.same_as)
                    if (t[a] != t[b]) return;
                for (auto [pos_in, var] : step.binds) env[var] = t[pos_in];
                chosen[step.body_index] = id;
                self(self, depth + 1);
            };

            if (range.index) {
                Tuple key;
                key.reserve(step.key_positions.size());
                for (auto pos : step.key_positions) {
                    const auto& s = lit.slots[pos];
                    key.push_back(s.kind == Slot::Kind::constant ? s.value : env[s.value]);
                }
                const auto* bucket = range.index->lookup(key);
                if (!bucket) return;
                // Positions are appended in increasing order; facts added
                // during this round sit past `end` and are skipped. The
                // bucket may grow while we recurse, so walk it by index.
                auto i = static_cast<std::size_t>(
                    std::lower_bound(bucket->begin(), bucket->end(), range.begin) - bucket->begin());
                for (; i < bucket->size() && (*bucket)[i] < range.end; ++i) try_position((*bucket)[i]);
            } else {
                for (std::uint32_t pos = range.begin; pos < range.end; ++pos) try_position(pos);
            }
        };
        match(match, 0);
    }

    DerivationSet finish() {
        DerivationSet out;
        out.input_count_ = input_count_;
        out.input_clauses_ = std::move(input_clauses_);
        out.ranks_ = std::move(ranks_);
        out.derivations_ = std::move(derivations_);
        out.literals_.reserve(tuples_.size());
        out.texts_.reserve(tuples_.size());
        for (FactId id = 0; id < tuples_.size(); ++id) {
            const auto& rel = relations_[fact_relation_[id]];
            Literal lit;
            lit.predicate = rel.name;
            for (Symbol s : tuples_[id]) {
                const auto& text = names_[s];
                lit.args.push_back(Term::constant(text, !is_bare_constant(text)));
            }
            auto text = canonical_text(lit);
            out.by_text_.emplace(text, id);
            out.texts_.push_back(std::move(text));
            out.literals_.push_back(std::move(lit));
        }
        return out;
    }

    const Program& program_;
    EvalOptions options_;

    std::unordered_map<std::string, Symbol> symbols_;
    std::vector<std::string> names_;
    std::map<std::string, std::size_t> relation_ids_;
    std::vector<Relation> relations_;

    std::vector<Tuple> tuples_;
    std::vector<std::size_t> fact_relation_;
    std::vector<std::uint32_t> ranks_;
    std::vector<std::vector<Derivation>> derivations_;
    std::vector<std::size_t> input_clauses_;
    std::size_t input_count_ = 0;

    std::vector<CompiledRule> rules_;
    std::vector<std::vector<Plan>> plans_;
};

DerivationSet evaluate(const Program& program, const EvalOptions& options) {
    return Evaluator(program, options).run();
}

}  // namespace firmgraph::logic
