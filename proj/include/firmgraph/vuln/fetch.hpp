#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "firmgraph/vuln/intel.hpp"

namespace firmgraph::vuln {

struct FetchOptions {
    std::string epss_url = "https://epss.cyentia.com/epss_scores-current.csv.gz";
    std::string kev_url = "https://www.cisa.gov/sites/default/files/feeds/known_exploited_vulnerabilities.json";
    std::chrono::milliseconds timeout{30'000};

    /// Defaults overridden by FIRMGRAPH_EPSS_URL, FIRMGRAPH_KEV_URL and
    /// FIRMGRAPH_FETCH_TIMEOUT_MS when set.
    static FetchOptions from_env();
};

/// GET over http or https. Throws Error on transport failure or a non-200
/// status.
std::string http_get(std::string_view url, std::chrono::milliseconds timeout);

/// Inflates gzip data; other input is returned unchanged.
std::string maybe_gunzip(std::string_view data);

/// Replaces the snapshot's EPSS and KEV parts with fresh downloads. A source
/// that fails keeps its snapshot value and adds a warning.
ExploitIntel refresh_intel(const ExploitIntel& snapshot, const FetchOptions& options, std::vector<std::string>& warnings);

}  // namespace firmgraph::vuln
