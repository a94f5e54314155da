#include "firmgraph/logic/ast.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <fmt/format.h>

#include "firmgraph/error.hpp"
#include "firmgraph/logic/parser.hpp"

namespace firmgraph::logic {

Term Term::constant(std::string text, bool quoted) {
    return Term{Kind::constant, std::move(text), quoted};
}

Term Term::variable(std::string text) {
    return Term{Kind::variable, std::move(text), false};
}

Term Term::wildcard(std::string text) {
    return Term{Kind::wildcard, std::move(text), false};
}

bool Literal::is_ground() const noexcept {
    return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_constant(); });
}

bool is_identifier(std::string_view text) noexcept {
    if (text.empty()) return false;
    const auto first = static_cast<unsigned char>(text.front());
    if (!std::isalpha(first) && first != '_') return false;
    return std::all_of(text.begin() + 1, text.end(), [](char c) {
        const auto u = static_cast<unsigned char>(c);
        return std::isalnum(u) || c == '_';
    });
}

bool is_bare_constant(std::string_view text) noexcept {
    if (text.empty()) return false;
    if (std::all_of(text.begin(), text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        return true;
    return std::islower(static_cast<unsigned char>(text.front())) && is_identifier(text);
}

namespace {

std::set<std::string> variables_of(const Literal& literal) {
    std::set<std::string> out;
    for (const auto& t : literal.args)
        if (t.is_variable()) out.insert(t.text);
    return out;
}

void validate(const Clause& clause) {
    if (clause.head.predicate.empty()) throw ProgramError("empty predicate name");
    for (const auto& lit : clause.body)
        if (lit.predicate.empty()) throw ProgramError("empty predicate name");

    for (const auto& t : clause.head.args) {
        if (t.is_wildcard())
            throw ProgramError(fmt::format("wildcard '{}' in head of '{}'", t.text, format_literal(clause.head)));
        if (t.is_constant() && t.text.empty())
            throw ProgramError(fmt::format("empty constant in '{}'", clause.head.predicate));
    }

    if (clause.is_fact()) {
        if (!clause.head.is_ground())
            throw ProgramError(fmt::format("fact '{}' is not ground", format_literal(clause.head)));
        return;
    }

    std::set<std::string> bound;
    for (const auto& lit : clause.body) {
        auto vars = variables_of(lit);
        bound.insert(vars.begin(), vars.end());
    }
    for (const auto& v : variables_of(clause.head)) {
        if (!bound.contains(v))
            throw ProgramError(fmt::format("variable '{}' in head of '{}' does not occur in the body", v,
                                           format_literal(clause.head)));
    }
}

}  // namespace

Program::Program(std::vector<Clause> clauses) {
    for (auto& c : clauses) add(std::move(c));
}

void Program::check_arity(const Literal& literal) {
    auto [it, inserted] = arities_.emplace(literal.predicate, literal.arity());
    if (!inserted && it->second != literal.arity())
        throw ArityError(literal.predicate, it->second, literal.arity());
}

bool Program::add(Clause clause) {
    validate(clause);

    // Check all literals before touching the table so a failing clause leaves
    // the program unchanged.
    std::map<std::string, std::size_t> pending;
    auto probe = [&](const Literal& lit) {
        std::size_t known = 0;
        if (auto it = arities_.find(lit.predicate); it != arities_.end())
            known = it->second;
        else if (auto jt = pending.find(lit.predicate); jt != pending.end())
            known = jt->second;
        else {
            pending.emplace(lit.predicate, lit.arity());
            return;
        }
        if (known != lit.arity()) throw ArityError(lit.predicate, known, lit.arity());
    };
    probe(clause.head);
    for (const auto& lit : clause.body) probe(lit);

    if (clause.is_fact()) {
        auto key = clause.head.predicate + "/" + std::to_string(clause.head.arity());
        for (const auto& t : clause.head.args) key += "\x1f" + t.text;
        if (fact_index_.contains(key)) return false;
        fact_index_.emplace(std::move(key), clauses_.size());
    }

    check_arity(clause.head);
    for (const auto& lit : clause.body) check_arity(lit);
    clauses_.push_back(std::move(clause));
    return true;
}

void Program::append(const Program& other) {
    for (const auto& c : other.clauses()) add(c);
}

}  // namespace firmgraph::logic
