#pragma once

#include <set>
#include <string>
#include <vector>

#include "firmgraph/firmware/model.hpp"
#include "firmgraph/logic/ast.hpp"
#include "firmgraph/vuln/cve_db.hpp"

namespace firmgraph::vuln {

struct VulnMatch {
    std::string binary;  // inventory name
    CveRecord cve;
    std::string matched_version;  // "*" or a version satisfying the record

    friend bool operator==(const VulnMatch&, const VulnMatch&) = default;
};

/// Pairs each inventory binary with the records of its product whose
/// constraints its version satisfies (any record when the version is `*`).
/// One match per (binary, cve_id), ordered by binary then cve_id.
std::vector<VulnMatch> match_vulnerabilities(const firmware::BinaryInventory& inventory, const CveDatabase& db);

/// `vulExists(CveId, Binary, AccessVector, LoseType, Severity)` per match and
/// lose type, ordered by binary, cve id, lose type.
std::vector<logic::Clause> emit_vul_facts(const std::vector<VulnMatch>& matches);

struct OssDetection {
    std::set<std::string> binaries;        // inventory names
    std::vector<logic::Clause> bug_facts;  // bugHyp(Binary, 'LOCAL', 'Undefined')
};

/// A binary is OSS when any record names its product, whatever the version.
OssDetection detect_oss(const firmware::BinaryInventory& inventory, const CveDatabase& db);

}  // namespace firmgraph::vuln
