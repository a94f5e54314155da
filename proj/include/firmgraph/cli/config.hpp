#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "firmgraph/ag/ruleset.hpp"
#include "firmgraph/error.hpp"
#include "firmgraph/pipeline.hpp"

namespace firmgraph::cli {

class ConfigError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::vector<std::filesystem::path> firmware;  // files, or one directory for corpus
    std::optional<std::filesystem::path> versions;
    std::filesystem::path cve_db;
    std::filesystem::path epss;
    std::filesystem::path kev;
    bool refresh_intel = false;
    ag::RulesetKind ruleset = ag::RulesetKind::combined;
    std::filesystem::path out = "firmgraph-out";
    std::size_t derivation_cap = 1'000'000;
    std::size_t path_cap = 10'000;
    bool include_empty = true;
    unsigned workers = 0;  // 0: one per processor
    std::set<std::string> patched;

    /// Input files exist and caps are positive. Throws ConfigError.
    void validate(bool need_cve_db = true) const;

    AnalysisOptions analysis_options() const;
};

struct LoadedIntel {
    IntelSources sources;
    std::string digest;  // hash of the source files' contents
    std::vector<std::string> warnings;
};

/// Reads the CVE snapshot and, when configured, the EPSS and KEV snapshots,
/// refreshing the latter online if asked.
LoadedIntel load_intel(const RunConfig& config);

/// `<stem>.versions.txt` next to a firmware document, if present.
std::optional<std::filesystem::path> sibling_versions(const std::filesystem::path& firmware);

}  // namespace firmgraph::cli
