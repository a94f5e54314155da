#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "firmgraph/logic/ast.hpp"

namespace firmgraph::logic {

using FactId = std::uint32_t;

/// One rule instantiation: the rule (index into Program::clauses()) and the
/// ground body facts it consumed, in body order.
struct Derivation {
    std::size_t rule = 0;
    std::vector<FactId> premises;
    /// Evaluation round that found this instantiation.
    std::uint32_t round = 0;

    friend bool operator==(const Derivation&, const Derivation&) = default;
};

struct EvalOptions {
    /// Upper bound on derived (non-input) facts before evaluation aborts.
    std::size_t max_derived_facts = 1'000'000;
};

/// The least fixpoint of a program together with every rule instantiation
/// that produced each derived fact. Immutable once returned by evaluate().
class DerivationSet {
public:
    std::size_t size() const noexcept { return literals_.size(); }
    std::size_t input_count() const noexcept { return input_count_; }
    std::size_t derived_count() const noexcept { return size() - input_count_; }

    const Literal& literal(FactId id) const { return literals_.at(id); }
    /// Canonical text, e.g. `dataFlow(openvpn, wget, environment)`.
    const std::string& text(FactId id) const { return texts_.at(id); }
    bool is_input(FactId id) const { return id < input_count_; }
    /// Round in which the fact first held (0 for input facts).
    std::uint32_t rank(FactId id) const { return ranks_.at(id); }
    /// Index of the input clause a fact came from; empty for derived facts.
    std::optional<std::size_t> source_clause(FactId id) const;
    std::span<const Derivation> derivations(FactId id) const { return derivations_.at(id); }

    std::optional<FactId> find(const Literal& ground) const;
    std::optional<FactId> find(std::string_view canonical_text) const;
    std::vector<FactId> with_predicate(std::string_view predicate) const;

    /// Sorted canonical texts of every fact (inputs and derived).
    std::vector<std::string> canonical() const;
    /// Sorted canonical texts of derived facts only.
    std::vector<std::string> canonical_derived() const;

private:
    friend class Evaluator;

    std::vector<Literal> literals_;
    std::vector<std::string> texts_;
    std::vector<std::uint32_t> ranks_;
    std::vector<std::vector<Derivation>> derivations_;
    std::vector<std::size_t> input_clauses_;
    std::map<std::string, FactId, std::less<>> by_text_;
    std::size_t input_count_ = 0;
};

/// Bottom-up semi-naive evaluation to the least fixpoint. Pure: the same
/// program yields the same fact set regardless of clause order.
///
/// Throws ResourceLimitError when more than options.max_derived_facts facts
/// would be derived.
DerivationSet evaluate(const Program& program, const EvalOptions& options = {});

/// Canonical text of a ground literal (constants quoted only where needed).
std::string canonical_text(const Literal& ground);

}  // namespace firmgraph::logic
