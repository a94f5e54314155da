#include "firmgraph/vuln/nvd_import.hpp"

#include <map>

#include <fmt/format.h>
#include <json.hpp>

#include "firmgraph/error.hpp"

namespace firmgraph::vuln {

using nlohmann::json;

namespace {

struct Cvss {
    AccessVector av;
    Severity severity;
    std::vector<LoseType> lose;
};

std::vector<std::string> split_cpe(const std::string& cpe) {
    std::vector<std::string> parts;
    std::string cur;
    for (std::size_t i = 0; i < cpe.size(); ++i) {
        if (cpe[i] == '\\' && i + 1 < cpe.size()) {
            cur += cpe[++i];
        } else if (cpe[i] == ':') {
            parts.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += cpe[i];
        }
    }
    parts.push_back(std::move(cur));
    return parts;
}

std::optional<AccessVector> map_access(const std::string& v) {
    if (v == "NETWORK") return AccessVector::network;
    if (v == "ADJACENT_NETWORK" || v == "ADJACENT") return AccessVector::adjacent;
    if (v == "LOCAL") return AccessVector::local;
    if (v == "PHYSICAL") return AccessVector::physical;
    return std::nullopt;
}

std::vector<LoseType> impacts(const json& data) {
    std::vector<LoseType> out;
    auto hit = [&](const char* key) {
        auto it = data.find(key);
        return it != data.end() && it->is_string() && it->get<std::string>() != "NONE";
    };
    if (hit("confidentialityImpact")) out.push_back(LoseType::confidentiality_loss);
    if (hit("integrityImpact")) out.push_back(LoseType::data_modification);
    if (hit("availabilityImpact")) out.push_back(LoseType::availability_loss);
    return out;
}

std::optional<Cvss> read_metrics(const json& cve) {
    auto metrics = cve.find("metrics");
    if (metrics == cve.end() || !metrics->is_object()) return std::nullopt;
    for (const char* key : {"cvssMetricV31", "cvssMetricV30"}) {
        auto list = metrics->find(key);
        if (list == metrics->end() || !list->is_array() || list->empty()) continue;
        const auto& data = (*list)[0].value("cvssData", json::object());
        auto av = map_access(data.value("attackVector", ""));
        auto sev = severity_from_string(data.value("baseSeverity", ""));
        if (av && sev) return Cvss{*av, *sev, impacts(data)};
    }
    auto list = metrics->find("cvssMetricV2");
    if (list != metrics->end() && list->is_array() && !list->empty()) {
        const auto& data = (*list)[0].value("cvssData", json::object());
        auto av = map_access(data.value("accessVector", ""));
        auto score = data.find("baseScore");
        if (av && score != data.end() && score->is_number())
            return Cvss{*av, severity_from_score(score->get<double>()), impacts(data)};
    }
    return std::nullopt;
}

void collect_matches(const json& node, std::vector<const json*>& out) {
    if (node.is_object()) {
        if (auto it = node.find("cpeMatch"); it != node.end() && it->is_array())
            for (const auto& m : *it) out.push_back(&m);
        for (const auto& [k, v] : node.items())
            if (k != "cpeMatch") collect_matches(v, out);
    } else if (node.is_array()) {
        for (const auto& v : node) collect_matches(v, out);
    }
}

}  // namespace

Severity severity_from_score(double score) noexcept {
    if (score < 4.0) return Severity::low;
    if (score < 7.0) return Severity::medium;
    if (score < 9.0) return Severity::high;
    return Severity::critical;
}

NvdImport import_nvd(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw SchemaError("/", fmt::format("invalid JSON: {}", e.what()));
    }
    auto vulns = doc.find("vulnerabilities");
    if (!doc.is_object() || vulns == doc.end() || !vulns->is_array())
        throw SchemaError("/vulnerabilities", "expected an array");

    NvdImport out;
    for (std::size_t i = 0; i < vulns->size(); ++i) {
        const auto& entry = (*vulns)[i];
        auto cve_it = entry.find("cve");
        if (cve_it == entry.end() || !cve_it->is_object())
            throw SchemaError(fmt::format("/vulnerabilities/{}/cve", i), "expected an object");
        const auto& cve = *cve_it;
        auto id = cve.value("id", "");
        if (!is_cve_id(id)) throw SchemaError(fmt::format("/vulnerabilities/{}/cve/id", i), "missing or malformed CVE id");

        auto cvss = read_metrics(cve);
        if (!cvss) {
            out.warnings.push_back(fmt::format("{}: no usable CVSS metrics", id));
            continue;
        }

        std::vector<const json*> matches;
        if (auto conf = cve.find("configurations"); conf != cve.end()) collect_matches(*conf, matches);

        std::map<std::string, std::vector<VersionConstraint>> by_product;
        for (const auto* m : matches) {
            if (!m->value("vulnerable", false)) continue;
            auto parts = split_cpe(m->value("criteria", ""));
            if (parts.size() < 6 || parts[0] != "cpe" || parts[2] != "a") continue;
            const auto& product = parts[4];
            const auto& version = parts[5];
            VersionConstraint c;
            if (version != "*" && version != "-") {
                c.kind = VersionConstraint::Kind::exact;
                c.exact = version;
            } else {
                auto bound = [&](const char* key, bool inclusive) -> std::optional<VersionConstraint::Bound> {
                    auto it = m->find(key);
                    if (it == m->end() || !it->is_string()) return std::nullopt;
                    return VersionConstraint::Bound{it->get<std::string>(), inclusive};
                };
                c.lower = bound("versionStartIncluding", true);
                if (!c.lower) c.lower = bound("versionStartExcluding", false);
                c.upper = bound("versionEndExcluding", false);
                if (!c.upper) c.upper = bound("versionEndIncluding", true);
                if (c.lower || c.upper) c.kind = VersionConstraint::Kind::range;
            }
            auto& list = by_product[product];
            if (std::find(list.begin(), list.end(), c) == list.end()) list.push_back(std::move(c));
        }
        if (by_product.empty()) {
            out.warnings.push_back(fmt::format("{}: no vulnerable application CPE", id));
            continue;
        }
        for (auto& [product, constraints] : by_product) {
            CveRecord r;
            r.cve_id = id;
            r.product = product;
            r.affected_versions = std::move(constraints);
            r.access_vector = cvss->av;
            r.severity = cvss->severity;
            r.lose_types = cvss->lose;
            out.records.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace firmgraph::vuln
