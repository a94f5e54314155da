#include "firmgraph/vuln/matching.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace firmgraph::vuln {

using logic::Clause;
using logic::Term;

std::vector<VulnMatch> match_vulnerabilities(const firmware::BinaryInventory& inventory, const CveDatabase& db) {
    std::map<std::pair<std::string, std::string>, VulnMatch> found;
    for (const auto& entry : inventory.entries) {
        for (auto idx : db.by_product(entry.name)) {
            const auto& rec = db.records()[idx];
            if (entry.version != "*" && !rec.affects(entry.version)) continue;
            auto key = std::make_pair(entry.name, rec.cve_id);
            auto it = found.find(key);
            if (it == found.end()) {
                found.emplace(key, VulnMatch{entry.name, rec, entry.version});
            } else if (entry.version == "*") {
                it->second.matched_version = "*";
            }
        }
    }
    std::vector<VulnMatch> out;
    for (auto& [key, m] : found) out.push_back(std::move(m));
    return out;
}

std::vector<Clause> emit_vul_facts(const std::vector<VulnMatch>& matches) {
    std::vector<std::tuple<std::string, std::string, std::string, const VulnMatch*>> rows;
    for (const auto& m : matches)
        for (auto lt : m.cve.lose_types)
            rows.emplace_back(firmware::sanitize_name(m.binary), m.cve.cve_id, std::string(to_string(lt)), &m);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a), std::get<2>(a)) <
               std::tie(std::get<0>(b), std::get<1>(b), std::get<2>(b));
    });
    std::vector<Clause> facts;
    for (const auto& [bin, id, lose, m] : rows) {
        Clause c;
        c.head.predicate = "vulExists";
        c.head.args = {Term::constant(id, true), Term::constant(bin),
                       Term::constant(std::string(to_string(m->cve.access_vector)), true),
                       Term::constant(lose, true), Term::constant(std::string(to_string(m->cve.severity)), true)};
        if (std::find(facts.begin(), facts.end(), c) == facts.end()) facts.push_back(std::move(c));
    }
    return facts;
}

OssDetection detect_oss(const firmware::BinaryInventory& inventory, const CveDatabase& db) {
    OssDetection out;
    std::set<std::string> emitted;
    for (const auto& entry : inventory.entries)
        if (db.has_product(entry.name)) out.binaries.insert(entry.name);
    for (const auto& name : out.binaries) {
        auto constant = firmware::sanitize_name(name);
        if (!emitted.insert(constant).second) continue;
        Clause c;
        c.head.predicate = "bugHyp";
        c.head.args = {Term::constant(constant), Term::constant("LOCAL", true), Term::constant("Undefined", true)};
        out.bug_facts.push_back(std::move(c));
    }
    return out;
}

}  // namespace firmgraph::vuln
