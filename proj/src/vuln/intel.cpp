#include "firmgraph/vuln/intel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>

#include <fmt/format.h>
#include <json.hpp>

#include "firmgraph/error.hpp"

namespace firmgraph::vuln {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto c = line.find(',', pos);
        out.push_back(trim(line.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos)));
        if (c == std::string_view::npos) break;
        pos = c + 1;
    }
    return out;
}

}  // namespace

std::map<std::string, double> load_epss_csv(std::string_view text) {
    std::map<std::string, double> out;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        auto cols = split_commas(line);
        if (!header_seen && cols[0] == "cve") {
            header_seen = true;
            continue;
        }
        auto where = fmt::format("line {}", line_no);
        if (cols.size() < 2) throw SchemaError(where, "expected 'cve,epss[,percentile]'");
        if (!is_cve_id(cols[0])) throw SchemaError(where, fmt::format("'{}' is not a CVE id", cols[0]));
        std::string num(cols[1]);
        char* end = nullptr;
        double v = std::strtod(num.c_str(), &end);
        if (num.empty() || end != num.c_str() + num.size() || !(v >= 0.0 && v <= 1.0))
            throw SchemaError(where, fmt::format("EPSS score '{}' is not a probability", cols[1]));
        out[std::string(cols[0])] = v;
    }
    return out;
}

std::set<std::string> load_kev_json(std::string_view document) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("/", fmt::format("invalid JSON: {}", e.what()));
    }
    auto vulns = doc.is_object() ? doc.find("vulnerabilities") : doc.end();
    if (!doc.is_object() || vulns == doc.end() || !vulns->is_array())
        throw SchemaError("/vulnerabilities", "expected an array");
    std::set<std::string> out;
    for (std::size_t i = 0; i < vulns->size(); ++i) {
        const auto& v = (*vulns)[i];
        auto it = v.is_object() ? v.find("cveID") : v.end();
        if (!v.is_object() || it == v.end() || !it->is_string())
            throw SchemaError(fmt::format("/vulnerabilities/{}/cveID", i), "expected a string");
        out.insert(it->get<std::string>());
    }
    return out;
}

double likelihood_of(const std::set<std::string>& cve_ids, const ExploitIntel& intel) {
    double best = 0.0;
    for (const auto& id : cve_ids) {
        if (intel.kev.contains(id)) return 100.0;
        if (auto it = intel.epss.find(id); it != intel.epss.end()) best = std::max(best, it->second * 100.0);
    }
    return best;
}

double likelihood(const std::vector<VulnMatch>& matches, const ExploitIntel& intel) {
    std::set<std::string> ids;
    for (const auto& m : matches) ids.insert(m.cve.cve_id);
    return likelihood_of(ids, intel);
}

}  // namespace firmgraph::vuln
