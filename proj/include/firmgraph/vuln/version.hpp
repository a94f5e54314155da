#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace firmgraph::vuln {

/// Affected-version constraint of a CVE record. Text forms:
///
///     any                 every version
///     1.19.2              exactly this version (string equality)
///     >=1.2,<1.19.2       bounded range; either bound may be omitted and
///                         `>`/`<=` are accepted as well
struct VersionConstraint {
    enum class Kind { any, exact, range };
    struct Bound {
        std::string version;
        bool inclusive = false;
        friend bool operator==(const Bound&, const Bound&) = default;
    };

    Kind kind = Kind::any;
    std::string exact;
    std::optional<Bound> lower;
    std::optional<Bound> upper;

    static VersionConstraint parse(std::string_view text);  // throws Error
    std::string to_string() const;
    bool satisfied_by(std::string_view version) const;

    friend bool operator==(const VersionConstraint&, const VersionConstraint&) = default;
};

/// Dotted-numeric view of a version after stripping a leading `v`/`V`;
/// empty when any component is not all digits ("4.2BSD", "1.0.2k").
std::optional<std::vector<unsigned long long>> numeric_version(std::string_view version);

/// Three-way numeric comparison; empty when either side is non-numeric.
std::optional<int> compare_versions(std::string_view a, std::string_view b);

}  // namespace firmgraph::vuln
