#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "firmgraph/ag/attack_graph.hpp"
#include "firmgraph/firmware/model.hpp"
#include "firmgraph/vuln/cve_db.hpp"
#include "firmgraph/vuln/intel.hpp"
#include "firmgraph/vuln/matching.hpp"

namespace firmgraph {

struct IntelSources {
    vuln::CveDatabase db;
    vuln::ExploitIntel exploit;
};

struct AnalysisOptions {
    ag::RulesetKind ruleset = ag::RulesetKind::combined;
    logic::EvalOptions eval;
};

struct FirmwareAnalysis {
    firmware::FirmwareGraph fw;
    firmware::BinaryInventory inventory;  // merged
    std::vector<vuln::VulnMatch> matches;
    std::set<std::string> oss;
    ag::AgInputs inputs;
    ag::AttackGraph graph;
    ag::AgMetrics metrics;
    std::vector<std::string> warnings;
};

/// Firmware graph and optional version list through matching, OSS detection,
/// fact emission and attack-graph generation.
FirmwareAnalysis analyze_firmware(firmware::FirmwareGraph fw, const std::optional<firmware::BinaryInventory>& versions,
                                  const vuln::CveDatabase& db, const AnalysisOptions& options = {});

/// Same analysis starting from a facts file instead of a firmware graph.
/// Each vulExists fact stands in for a match so risk rows can be computed.
FirmwareAnalysis analyze_facts(std::string fw_name, const logic::Program& facts, const AnalysisOptions& options = {});

/// True for paths that should be read as Datalog facts (.P, .pl).
bool is_facts_path(const std::filesystem::path& path);

/// Facts file: topology, then bugHyp, then vulExists, one clause per line.
std::string facts_text(const ag::AgInputs& inputs);

/// Writes facts.P, ag.dot, ag.json, metrics.json and risk.csv under `dir`.
void write_analysis_artifacts(const FirmwareAnalysis& analysis, const vuln::ExploitIntel& intel,
                              const std::filesystem::path& dir);

}  // namespace firmgraph
