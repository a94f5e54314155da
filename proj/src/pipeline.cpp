#include "firmgraph/pipeline.hpp"

#include "firmgraph/ag/export.hpp"
#include "firmgraph/logic/parser.hpp"
#include "firmgraph/risk/risk_model.hpp"
#include "firmgraph/util/fs.hpp"

namespace firmgraph {

FirmwareAnalysis analyze_firmware(firmware::FirmwareGraph fw, const std::optional<firmware::BinaryInventory>& versions,
                                  const vuln::CveDatabase& db, const AnalysisOptions& options) {
    FirmwareAnalysis a;
    a.warnings = fw.warnings;
    a.inventory = firmware::merge_inventory(fw, versions.value_or(firmware::BinaryInventory{}));
    a.inputs.topology = firmware::emit_topology_facts(fw);
    a.matches = vuln::match_vulnerabilities(a.inventory, db);
    a.inputs.vul_facts = vuln::emit_vul_facts(a.matches);
    auto oss = vuln::detect_oss(a.inventory, db);
    a.oss = std::move(oss.binaries);
    a.inputs.bug_facts = std::move(oss.bug_facts);
    a.graph = ag::generate_ag(a.inputs, ag::shipped_ruleset(options.ruleset), options.eval);
    a.metrics = ag::metrics(a.graph);
    a.fw = std::move(fw);
    return a;
}

FirmwareAnalysis analyze_facts(std::string fw_name, const logic::Program& facts, const AnalysisOptions& options) {
    FirmwareAnalysis a;
    a.fw.fw_name = std::move(fw_name);
    a.inputs = ag::inputs_from_facts(facts);
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& c : a.inputs.vul_facts) {
        const auto& cve = c.head.args[0].text;
        const auto& bin = c.head.args[1].text;
        if (!seen.emplace(bin, cve).second) continue;
        vuln::VulnMatch m;
        m.binary = bin;
        m.cve.cve_id = cve;
        m.cve.product = bin;
        m.matched_version = "*";
        a.matches.push_back(std::move(m));
    }
    for (const auto& c : a.inputs.bug_facts) a.oss.insert(c.head.args[0].text);
    a.graph = ag::generate_ag(a.inputs, ag::shipped_ruleset(options.ruleset), options.eval);
    a.metrics = ag::metrics(a.graph);
    return a;
}

bool is_facts_path(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    return ext == ".P" || ext == ".pl";
}

std::string facts_text(const ag::AgInputs& inputs) {
    std::string out;
    for (const auto& c : inputs.topology) out += logic::format_clause(c) + "\n";
    for (const auto& c : inputs.bug_facts) out += logic::format_clause(c) + "\n";
    for (const auto& c : inputs.vul_facts) out += logic::format_clause(c) + "\n";
    return out;
}

void write_analysis_artifacts(const FirmwareAnalysis& a, const vuln::ExploitIntel& intel,
                              const std::filesystem::path& dir) {
    util::write_file_atomic(dir / "facts.P", facts_text(a.inputs));
    util::write_file_atomic(dir / "ag.dot", ag::export_dot(a.graph.proof));
    util::write_file_atomic(dir / "ag.json", ag::export_json(a.graph.proof));
    util::write_file_atomic(dir / "metrics.json", risk::metrics_json(a.metrics));
    risk::FirmwareRiskInput in{&a.graph, &a.matches};
    auto rows = risk::binary_risk_table(std::span(&in, 1), intel);
    util::write_file_atomic(dir / "risk.csv", risk::risk_table_csv(rows));
}

}  // namespace firmgraph
