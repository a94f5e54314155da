#include "firmgraph/risk/risk_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "firmgraph/error.hpp"
#include "firmgraph/firmware/model.hpp"

namespace firmgraph::risk {

using nlohmann::ordered_json;

CorpusStats corpus_stats(std::span<const ag::AgMetrics> metrics) {
    if (metrics.empty()) throw Error("corpus statistics need at least one firmware");
    CorpusStats s;
    s.firmware_count = metrics.size();
    double ap = 0, oss = 0, vb = 0;
    for (const auto& m : metrics) {
        ap += static_cast<double>(m.attack_points);
        oss += static_cast<double>(m.potentially_compromised_oss);
        vb += static_cast<double>(m.vulnerable_binaries);
        s.max_attack_points = std::max(s.max_attack_points, m.attack_points);
        s.max_potentially_compromised_oss = std::max(s.max_potentially_compromised_oss, m.potentially_compromised_oss);
        s.max_vulnerable_binaries = std::max(s.max_vulnerable_binaries, m.vulnerable_binaries);
    }
    auto n = static_cast<double>(metrics.size());
    s.mean_attack_points = ap / n;
    s.mean_potentially_compromised_oss = oss / n;
    s.mean_vulnerable_binaries = vb / n;
    return s;
}

double impact(std::size_t occurrences, std::size_t interactions) {
    if (occurrences == 0) throw Error("impact is undefined for a binary with no occurrences");
    return static_cast<double>(interactions) / static_cast<double>(occurrences);
}

double risk(double impact, double likelihood) { return impact * likelihood; }

std::vector<BinaryRiskRow> binary_risk_table(std::span<const FirmwareRiskInput> corpus, const vuln::ExploitIntel& intel) {
    std::map<std::string, BinaryRiskRow> rows;
    std::map<std::string, std::set<std::string>> cves;

    for (const auto& fw : corpus) {
        if (fw.matches)
            for (const auto& m : *fw.matches) cves[firmware::sanitize_name(m.binary)].insert(m.cve.cve_id);
        if (!fw.graph) continue;
        const auto& g = *fw.graph;
        std::map<std::string, std::size_t> incident;
        for (const auto& n : g.proof.nodes) {
            const auto& lit = g.literals[static_cast<std::size_t>(n.id - 1)];
            if (n.kind != logic::NodeKind::leaf || lit.predicate != "dataFlow" || lit.arity() != 3) continue;
            ++incident[lit.args[0].text];
            if (lit.args[1].text != lit.args[0].text) ++incident[lit.args[1].text];
        }
        for (const auto& b : ag::goal_binaries(g)) {
            auto& row = rows[b];
            row.binary = b;
            ++row.occurrences;
            row.interactions += incident[b];
        }
    }

    std::vector<BinaryRiskRow> out;
    for (auto& [name, row] : rows) {
        row.impact = impact(row.occurrences, row.interactions);
        auto it = cves.find(name);
        if (it != cves.end()) {
            row.cve_count = it->second.size();
            row.likelihood = vuln::likelihood_of(it->second, intel);
        }
        row.risk = risk(row.impact, row.likelihood);
        out.push_back(std::move(row));
    }
    std::stable_sort(out.begin(), out.end(), [](const BinaryRiskRow& a, const BinaryRiskRow& b) {
        if (a.risk != b.risk) return a.risk > b.risk;
        return a.binary < b.binary;
    });
    return out;
}

double round1(double value) { return std::round(value * 10.0) / 10.0; }

std::string risk_table_csv(std::span<const BinaryRiskRow> rows) {
    std::string out = "binary,occurrences,interactions,impact,cves,likelihood,risk\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{},{:.1f},{},{:.1f},{}\n", r.binary, r.occurrences, r.interactions, round1(r.impact),
                           r.cve_count, round1(r.likelihood), std::llround(r.risk));
    return out;
}

std::string risk_table_json(std::span<const BinaryRiskRow> rows) {
    auto doc = ordered_json::array();
    for (const auto& r : rows) {
        ordered_json j;
        j["binary"] = r.binary;
        j["occurrences"] = r.occurrences;
        j["interactions"] = r.interactions;
        j["impact"] = round1(r.impact);
        j["cves"] = r.cve_count;
        j["likelihood"] = round1(r.likelihood);
        j["risk"] = std::llround(r.risk);
        doc.push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

std::string corpus_stats_json(const CorpusStats& s) {
    ordered_json doc;
    doc["firmware_count"] = s.firmware_count;
    doc["mean"] = {{"attack_points", round1(s.mean_attack_points)},
                   {"potentially_compromised_oss", round1(s.mean_potentially_compromised_oss)},
                   {"vulnerable_binaries", round1(s.mean_vulnerable_binaries)}};
    doc["max"] = {{"attack_points", s.max_attack_points},
                  {"potentially_compromised_oss", s.max_potentially_compromised_oss},
                  {"vulnerable_binaries", s.max_vulnerable_binaries}};
    return doc.dump(2) + "\n";
}

std::string metrics_json(const ag::AgMetrics& m) {
    ordered_json doc;
    doc["attack_points"] = m.attack_points;
    doc["potentially_compromised_oss"] = m.potentially_compromised_oss;
    doc["vulnerable_binaries"] = m.vulnerable_binaries;
    return doc.dump(2) + "\n";
}

}  // namespace firmgraph::risk
