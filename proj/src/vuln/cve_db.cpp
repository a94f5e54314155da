#include "firmgraph/vuln/cve_db.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>

#include <fmt/format.h>
#include <json.hpp>

#include "firmgraph/error.hpp"

namespace firmgraph::vuln {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 4> kAccess{"NETWORK", "ADJACENT", "LOCAL", "PHYSICAL"};
constexpr std::array<std::string_view, 4> kSeverity{"LOW", "MEDIUM", "HIGH", "CRITICAL"};
constexpr std::array<std::string_view, 3> kLose{"confidentiality_loss", "data_modification", "availability_loss"};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view text) {
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == text) return static_cast<E>(i);
    return std::nullopt;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string field_string(const json& rec, const std::string& path, const char* key) {
    auto it = rec.find(key);
    if (it == rec.end()) throw SchemaError(path + "/" + key, "required field is missing");
    if (!it->is_string()) throw SchemaError(path + "/" + key, "expected a string");
    return it->get<std::string>();
}

const json& field_array(const json& rec, const std::string& path, const char* key) {
    auto it = rec.find(key);
    if (it == rec.end()) throw SchemaError(path + "/" + key, "required field is missing");
    if (!it->is_array()) throw SchemaError(path + "/" + key, "expected an array");
    return *it;
}

}  // namespace

std::string_view to_string(AccessVector v) noexcept { return kAccess[static_cast<std::size_t>(v)]; }
std::string_view to_string(Severity s) noexcept { return kSeverity[static_cast<std::size_t>(s)]; }
std::string_view to_string(LoseType t) noexcept { return kLose[static_cast<std::size_t>(t)]; }

std::optional<AccessVector> access_vector_from_string(std::string_view text) noexcept {
    return lookup<AccessVector>(kAccess, text);
}
std::optional<Severity> severity_from_string(std::string_view text) noexcept {
    return lookup<Severity>(kSeverity, text);
}
std::optional<LoseType> lose_type_from_string(std::string_view text) noexcept {
    return lookup<LoseType>(kLose, text);
}

bool is_cve_id(std::string_view text) noexcept {
    static const std::regex re("CVE-[0-9]{4}-[0-9]{4,}");
    return std::regex_match(text.begin(), text.end(), re);
}

bool CveRecord::affects(std::string_view version) const {
    return std::any_of(affected_versions.begin(), affected_versions.end(),
                       [&](const VersionConstraint& c) { return c.satisfied_by(version); });
}

std::string CveDatabase::product_key(std::string_view name) {
    auto key = lower(name);
    std::replace(key.begin(), key.end(), '-', '_');
    return key;
}

CveDatabase::CveDatabase(std::vector<CveRecord> records, std::vector<std::string>* warnings) {
    std::map<std::pair<std::string, std::string>, std::size_t> slot;
    for (auto& r : records) {
        r.product = lower(r.product);
        std::sort(r.lose_types.begin(), r.lose_types.end());
        r.lose_types.erase(std::unique(r.lose_types.begin(), r.lose_types.end()), r.lose_types.end());
        auto key = std::make_pair(r.cve_id, product_key(r.product));
        if (auto it = slot.find(key); it != slot.end()) {
            if (warnings) warnings->push_back(fmt::format("duplicate record {} for product {}; keeping the later one", r.cve_id, r.product));
            records_[it->second] = std::move(r);
            continue;
        }
        slot.emplace(key, records_.size());
        records_.push_back(std::move(r));
    }
    for (std::size_t i = 0; i < records_.size(); ++i) index_[product_key(records_[i].product)].push_back(i);
}

std::span<const std::size_t> CveDatabase::by_product(std::string_view name) const {
    auto it = index_.find(product_key(name));
    if (it == index_.end()) return {};
    return it->second;
}

CveLoad load_cve_db(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw SchemaError("/", fmt::format("invalid JSON: {}", e.what()));
    }
    if (!doc.is_array()) throw SchemaError("/", "expected an array of CVE records");

    std::vector<CveRecord> records;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        std::string path = fmt::format("/{}", i);
        const auto& rec = doc[i];
        if (!rec.is_object()) throw SchemaError(path, "expected an object");
        CveRecord r;
        r.cve_id = field_string(rec, path, "cve_id");
        if (!is_cve_id(r.cve_id)) throw SchemaError(path + "/cve_id", fmt::format("'{}' is not a CVE id", r.cve_id));
        r.product = field_string(rec, path, "product");
        if (r.product.empty()) throw SchemaError(path + "/product", "product must be nonempty");

        const auto& versions = field_array(rec, path, "affected_versions");
        for (std::size_t k = 0; k < versions.size(); ++k) {
            auto vpath = fmt::format("{}/affected_versions/{}", path, k);
            if (!versions[k].is_string()) throw SchemaError(vpath, "expected a string");
            try {
                r.affected_versions.push_back(VersionConstraint::parse(versions[k].get<std::string>()));
            } catch (const SchemaError&) {
                throw;
            } catch (const Error& e) {
                throw SchemaError(vpath, e.what());
            }
        }

        auto av = field_string(rec, path, "access_vector");
        auto av_e = access_vector_from_string(av);
        if (!av_e) throw SchemaError(path + "/access_vector", fmt::format("unknown access vector '{}'", av));
        r.access_vector = *av_e;

        auto sev = field_string(rec, path, "severity");
        auto sev_e = severity_from_string(sev);
        if (!sev_e) throw SchemaError(path + "/severity", fmt::format("unknown severity '{}'", sev));
        r.severity = *sev_e;

        const auto& loses = field_array(rec, path, "lose_types");
        for (std::size_t k = 0; k < loses.size(); ++k) {
            auto lpath = fmt::format("{}/lose_types/{}", path, k);
            if (!loses[k].is_string()) throw SchemaError(lpath, "expected a string");
            auto lt = lose_type_from_string(loses[k].get<std::string>());
            if (!lt) throw SchemaError(lpath, fmt::format("unknown lose type '{}'", loses[k].get<std::string>()));
            r.lose_types.push_back(*lt);
        }
        records.push_back(std::move(r));
    }

    CveLoad out;
    out.db = CveDatabase(std::move(records), &out.warnings);
    return out;
}

std::string dump_cve_db(std::span<const CveRecord> records) {
    auto doc = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["cve_id"] = r.cve_id;
        j["product"] = r.product;
        auto versions = nlohmann::ordered_json::array();
        for (const auto& c : r.affected_versions) versions.push_back(c.to_string());
        j["affected_versions"] = versions;
        j["access_vector"] = std::string(to_string(r.access_vector));
        j["severity"] = std::string(to_string(r.severity));
        auto loses = nlohmann::ordered_json::array();
        for (auto t : r.lose_types) loses.push_back(std::string(to_string(t)));
        j["lose_types"] = loses;
        doc.push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

}  // namespace firmgraph::vuln
