#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "firmgraph/ag/attack_graph.hpp"
#include "firmgraph/vuln/intel.hpp"

namespace firmgraph::risk {

struct CorpusStats {
    std::size_t firmware_count = 0;
    double mean_attack_points = 0;
    double mean_potentially_compromised_oss = 0;
    double mean_vulnerable_binaries = 0;
    std::size_t max_attack_points = 0;
    std::size_t max_potentially_compromised_oss = 0;
    std::size_t max_vulnerable_binaries = 0;
};

/// Means (unrounded) and maxima per metric. Throws Error on an empty list.
CorpusStats corpus_stats(std::span<const ag::AgMetrics> metrics);

/// interactions / occurrences. Throws Error when occurrences is 0.
double impact(std::size_t occurrences, std::size_t interactions);

double risk(double impact, double likelihood);

struct BinaryRiskRow {
    std::string binary;
    std::size_t occurrences = 0;   // attack graphs naming the binary in a goal
    std::size_t interactions = 0;  // incident dataFlow LEAF nodes over those graphs
    double impact = 0;
    std::size_t cve_count = 0;     // distinct matched CVEs over the corpus
    double likelihood = 0;         // percent
    double risk = 0;               // unrounded impact * likelihood
};

struct FirmwareRiskInput {
    const ag::AttackGraph* graph = nullptr;
    const std::vector<vuln::VulnMatch>* matches = nullptr;
};

/// One row per goal binary of any graph, by descending risk then name.
std::vector<BinaryRiskRow> binary_risk_table(std::span<const FirmwareRiskInput> corpus, const vuln::ExploitIntel& intel);

double round1(double value);

/// `binary,occurrences,interactions,impact,cves,likelihood,risk` with impact
/// and likelihood to one decimal and risk to the nearest integer.
std::string risk_table_csv(std::span<const BinaryRiskRow> rows);
std::string risk_table_json(std::span<const BinaryRiskRow> rows);
std::string corpus_stats_json(const CorpusStats& stats);
std::string metrics_json(const ag::AgMetrics& m);

}  // namespace firmgraph::risk
