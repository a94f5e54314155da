#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace firmgraph::logic {

/// A Datalog argument. Constants compare by text only: `'NETWORK'`,
/// `"NETWORK"` and (for identifier-shaped text) the bare form all denote the
/// same constant. `quoted` only records how the constant was written so
/// formatting can reproduce it.
struct Term {
    enum class Kind { constant, variable, wildcard };

    Kind kind = Kind::constant;
    std::string text;
    bool quoted = false;

    static Term constant(std::string text, bool quoted = false);
    static Term variable(std::string text);
    static Term wildcard(std::string text = "_");

    bool is_constant() const noexcept { return kind == Kind::constant; }
    bool is_variable() const noexcept { return kind == Kind::variable; }
    bool is_wildcard() const noexcept { return kind == Kind::wildcard; }

    friend bool operator==(const Term& a, const Term& b) noexcept {
        return a.kind == b.kind && a.text == b.text;
    }
};

struct Literal {
    std::string predicate;
    std::vector<Term> args;

    std::size_t arity() const noexcept { return args.size(); }
    bool is_ground() const noexcept;

    friend bool operator==(const Literal&, const Literal&) = default;
};

struct Clause {
    Literal head;
    std::vector<Literal> body;
    std::optional<std::string> label;

    bool is_fact() const noexcept { return body.empty(); }

    friend bool operator==(const Clause&, const Clause&) = default;
};

/// True when `text` can be written as a bare constant: a lowercase-initial
/// identifier or an unsigned integer.
bool is_bare_constant(std::string_view text) noexcept;

/// True when `text` is a valid identifier ([A-Za-z_][A-Za-z0-9_]*).
bool is_identifier(std::string_view text) noexcept;

/// An ordered collection of validated clauses.
///
/// Invariants enforced by add():
///   - each predicate keeps the arity of its first use;
///   - facts are ground;
///   - rule heads contain no wildcards and only variables bound in the body;
///   - ground facts are kept once (later duplicates are dropped).
class Program {
public:
    Program() = default;
    explicit Program(std::vector<Clause> clauses);

    /// Validates and appends. Returns false when the clause was a duplicate
    /// fact and was dropped.
    bool add(Clause clause);
    void append(const Program& other);

    const std::vector<Clause>& clauses() const noexcept { return clauses_; }
    const std::map<std::string, std::size_t>& arities() const noexcept { return arities_; }
    std::size_t size() const noexcept { return clauses_.size(); }
    bool empty() const noexcept { return clauses_.empty(); }

private:
    void check_arity(const Literal& literal);

    std::vector<Clause> clauses_;
    std::map<std::string, std::size_t> arities_;
    std::map<std::string, std::size_t> fact_index_;
};

}  // namespace firmgraph::logic
