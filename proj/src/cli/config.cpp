#include "firmgraph/cli/config.hpp"

#include <fmt/format.h>

#include "firmgraph/service/snapshot_store.hpp"
#include "firmgraph/util/fs.hpp"
#include "firmgraph/vuln/fetch.hpp"

namespace firmgraph::cli {

namespace fs = std::filesystem;

namespace {

void require_file(const fs::path& p, const char* what) {
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) throw ConfigError(fmt::format("{} '{}' does not exist", what, p.string()));
}

}  // namespace

void RunConfig::validate(bool need_cve_db) const {
    if (need_cve_db) {
        if (cve_db.empty()) throw ConfigError("no CVE snapshot given (--cve-db or FIRMGRAPH_CVE_DB)");
        require_file(cve_db, "CVE snapshot");
    }
    if (!epss.empty()) require_file(epss, "EPSS snapshot");
    if (!kev.empty()) require_file(kev, "KEV catalog");
    if (versions) require_file(*versions, "version list");
    if (derivation_cap == 0) throw ConfigError("--derivation-cap must be positive");
    if (path_cap == 0) throw ConfigError("--path-cap must be positive");
}

AnalysisOptions RunConfig::analysis_options() const {
    AnalysisOptions o;
    o.ruleset = ruleset;
    o.eval.max_derived_facts = derivation_cap;
    return o;
}

LoadedIntel load_intel(const RunConfig& config) {
    LoadedIntel out;
    std::string material;
    auto read = [&](const fs::path& p) {
        auto text = util::read_file(p);
        material += text;
        material += '\0';
        return text;
    };
    auto wrap = [](const fs::path& p, auto&& fn) {
        try {
            fn();
        } catch (const SchemaError& e) {
            throw e.within(p.string());
        }
    };

    wrap(config.cve_db, [&] {
        auto load = vuln::load_cve_db(read(config.cve_db));
        out.sources.db = std::move(load.db);
        out.warnings = std::move(load.warnings);
    });
    if (!config.epss.empty()) wrap(config.epss, [&] { out.sources.exploit.epss = vuln::load_epss_csv(read(config.epss)); });
    if (!config.kev.empty()) wrap(config.kev, [&] { out.sources.exploit.kev = vuln::load_kev_json(read(config.kev)); });
    if (config.refresh_intel) {
        out.sources.exploit = vuln::refresh_intel(out.sources.exploit, vuln::FetchOptions::from_env(), out.warnings);
        for (const auto& id : out.sources.exploit.kev) material += id + "\n";
        for (const auto& [id, v] : out.sources.exploit.epss) material += fmt::format("{},{}\n", id, v);
    }
    out.digest = service::sha256_hex(material);
    return out;
}

std::optional<fs::path> sibling_versions(const fs::path& firmware) {
    auto candidate = firmware.parent_path() / (firmware.stem().string() + ".versions.txt");
    std::error_code ec;
    if (fs::is_regular_file(candidate, ec)) return candidate;
    return std::nullopt;
}

}  // namespace firmgraph::cli
