#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "firmgraph/vuln/version.hpp"

namespace firmgraph::vuln {

enum class AccessVector { network, adjacent, local, physical };
enum class Severity { low, medium, high, critical };
enum class LoseType { confidentiality_loss, data_modification, availability_loss };

// Upper-case forms as they appear in facts ("NETWORK", "HIGH").
std::string_view to_string(AccessVector v) noexcept;
std::string_view to_string(Severity s) noexcept;
std::string_view to_string(LoseType t) noexcept;
std::optional<AccessVector> access_vector_from_string(std::string_view text) noexcept;
std::optional<Severity> severity_from_string(std::string_view text) noexcept;
std::optional<LoseType> lose_type_from_string(std::string_view text) noexcept;

bool is_cve_id(std::string_view text) noexcept;

struct CveRecord {
    std::string cve_id;
    std::string product;  // lowercase
    // A version is affected when it satisfies any one constraint.
    std::vector<VersionConstraint> affected_versions;
    AccessVector access_vector = AccessVector::network;
    Severity severity = Severity::low;
    std::vector<LoseType> lose_types;  // sorted, unique

    bool affects(std::string_view version) const;

    friend bool operator==(const CveRecord&, const CveRecord&) = default;
};

/// Immutable record collection indexed by product. Product keys are matched
/// after lowercasing and `-` to `_` so `net-cgi` finds `net_cgi`.
class CveDatabase {
public:
    CveDatabase() = default;
    /// Later records with the same (cve_id, product) replace earlier ones;
    /// each replacement is reported in `warnings` when given.
    explicit CveDatabase(std::vector<CveRecord> records, std::vector<std::string>* warnings = nullptr);

    std::span<const CveRecord> records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    /// Indices into records() for a product or binary name.
    std::span<const std::size_t> by_product(std::string_view name) const;
    bool has_product(std::string_view name) const { return !by_product(name).empty(); }

    static std::string product_key(std::string_view name);

private:
    std::vector<CveRecord> records_;
    std::map<std::string, std::vector<std::size_t>, std::less<>> index_;
};

struct CveLoad {
    CveDatabase db;
    std::vector<std::string> warnings;
};

/// Reads the snapshot format: a JSON array of
///
///     {"cve_id", "product", "affected_versions": [constraint...],
///      "access_vector", "severity", "lose_types": [...]}
///
/// Throws SchemaError naming the offending field.
CveLoad load_cve_db(std::string_view document);

std::string dump_cve_db(std::span<const CveRecord> records);

}  // namespace firmgraph::vuln
