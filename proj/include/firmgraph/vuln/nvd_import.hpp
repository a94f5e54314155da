#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "firmgraph/vuln/cve_db.hpp"

namespace firmgraph::vuln {

struct NvdImport {
    std::vector<CveRecord> records;
    // CVEs skipped for lack of CVSS metrics or application CPEs.
    std::vector<std::string> warnings;
};

/// Converts an NVD 2.0 CVE API response (`{"vulnerabilities": [{"cve": ...}]}`)
/// into snapshot records, one per (CVE, product). CVSS v3.1/v3.0 metrics are
/// preferred; v2 is the fallback with its base score mapped to a severity
/// band. Lose types come from the C/I/A impact metrics.
NvdImport import_nvd(std::string_view document);

/// v2 base score to severity: <4 LOW, <7 MEDIUM, <9 HIGH, else CRITICAL.
Severity severity_from_score(double score) noexcept;

}  // namespace firmgraph::vuln
