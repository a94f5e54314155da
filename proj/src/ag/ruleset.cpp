#include "firmgraph/ag/ruleset.hpp"

#include "firmgraph/logic/parser.hpp"

namespace firmgraph::ag {

namespace detail {
extern const std::string_view external_threat_source;
extern const std::string_view internal_threat_source;
}  // namespace detail

std::string_view to_string(RulesetKind kind) noexcept {
    switch (kind) {
        case RulesetKind::external_threat: return "external_threat";
        case RulesetKind::internal_threat: return "internal_threat";
        case RulesetKind::combined: return "combined";
    }
    return "combined";
}

std::optional<RulesetKind> ruleset_kind_from_string(std::string_view text) noexcept {
    if (text == "external" || text == "external_threat") return RulesetKind::external_threat;
    if (text == "internal" || text == "internal_threat") return RulesetKind::internal_threat;
    if (text == "combined") return RulesetKind::combined;
    return std::nullopt;
}

std::string_view shipped_ruleset_source(RulesetKind kind) {
    switch (kind) {
        case RulesetKind::external_threat: return detail::external_threat_source;
        case RulesetKind::internal_threat: return detail::internal_threat_source;
        case RulesetKind::combined: break;
    }
    static const std::string both =
        std::string(detail::external_threat_source) + "\n" + std::string(detail::internal_threat_source);
    return both;
}

const Ruleset& shipped_ruleset(RulesetKind kind) {
    static const Ruleset external{RulesetKind::external_threat,
                                  logic::parse_program(shipped_ruleset_source(RulesetKind::external_threat))};
    static const Ruleset internal{RulesetKind::internal_threat,
                                  logic::parse_program(shipped_ruleset_source(RulesetKind::internal_threat))};
    static const Ruleset combined{RulesetKind::combined,
                                  logic::parse_program(shipped_ruleset_source(RulesetKind::combined))};
    switch (kind) {
        case RulesetKind::external_threat: return external;
        case RulesetKind::internal_threat: return internal;
        case RulesetKind::combined: break;
    }
    return combined;
}

}  // namespace firmgraph::ag
