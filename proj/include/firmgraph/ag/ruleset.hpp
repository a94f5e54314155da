#pragma once

#include <optional>
#include <string_view>

#include "firmgraph/logic/ast.hpp"

namespace firmgraph::ag {

enum class RulesetKind { external_threat, internal_threat, combined };

std::string_view to_string(RulesetKind kind) noexcept;
// Accepts "external", "internal", "combined" and the full names.
std::optional<RulesetKind> ruleset_kind_from_string(std::string_view text) noexcept;

struct Ruleset {
    RulesetKind kind = RulesetKind::combined;
    logic::Program rules;
};

/// Shipped rules: external_threat has the four interaction rules,
/// internal_threat the bugHyp rule and its two propagation rules, combined
/// both. Parsed once.
const Ruleset& shipped_ruleset(RulesetKind kind);

std::string_view shipped_ruleset_source(RulesetKind kind);

}  // namespace firmgraph::ag
