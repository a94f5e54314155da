#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "firmgraph/vuln/matching.hpp"

namespace firmgraph::vuln {

/// Exploitation evidence: CISA KEV membership and EPSS probabilities.
struct ExploitIntel {
    std::set<std::string> kev;
    std::map<std::string, double> epss;  // values in [0, 1]
};

/// EPSS scores as published (`cve,epss,percentile`, optionally preceded by a
/// `#model_version...` comment line). Throws SchemaError("line N", ...).
std::map<std::string, double> load_epss_csv(std::string_view text);

/// CVE ids of a KEV catalog document (`{"vulnerabilities": [{"cveID": ...}]}`).
std::set<std::string> load_kev_json(std::string_view document);

/// 100 when a matched CVE is KEV-listed, else the highest matched EPSS as a
/// percentage (unknown CVEs count as 0); 0 without matches.
double likelihood(const std::vector<VulnMatch>& matches, const ExploitIntel& intel);

/// Same rule over bare CVE ids.
double likelihood_of(const std::set<std::string>& cve_ids, const ExploitIntel& intel);

}  // namespace firmgraph::vuln
