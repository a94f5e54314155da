#include "firmgraph/vuln/version.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include <fmt/format.h>

#include "firmgraph/error.hpp"

namespace firmgraph::vuln {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

std::optional<std::vector<unsigned long long>> numeric_version(std::string_view version) {
    if (!version.empty() && (version.front() == 'v' || version.front() == 'V')) version.remove_prefix(1);
    if (version.empty()) return std::nullopt;
    std::vector<unsigned long long> parts;
    std::size_t pos = 0;
    while (true) {
        auto dot = version.find('.', pos);
        auto piece = version.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos);
        if (piece.empty()) return std::nullopt;
        unsigned long long value = 0;
        auto [end, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), value);
        if (ec != std::errc{} || end != piece.data() + piece.size()) return std::nullopt;
        parts.push_back(value);
        if (dot == std::string_view::npos) break;
        pos = dot + 1;
    }
    return parts;
}

std::optional<int> compare_versions(std::string_view a, std::string_view b) {
    auto x = numeric_version(a);
    auto y = numeric_version(b);
    if (!x || !y) return std::nullopt;
    // Missing trailing components count as zero: 1.2 == 1.2.0.
    auto n = std::max(x->size(), y->size());
    x->resize(n, 0);
    y->resize(n, 0);
    if (*x < *y) return -1;
    if (*x > *y) return 1;
    return 0;
}

VersionConstraint VersionConstraint::parse(std::string_view text) {
    text = trim(text);
    if (text.empty()) throw Error("empty version constraint");
    VersionConstraint c;
    if (text == "any" || text == "*") return c;
    if (text.front() != '<' && text.front() != '>' && text.front() != '=') {
        if (text.find(',') != std::string_view::npos || !std::isalnum(static_cast<unsigned char>(text.front())))
            throw Error(fmt::format("bad version constraint '{}'", text));
        c.kind = Kind::exact;
        c.exact = std::string(text);
        return c;
    }
    c.kind = Kind::range;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        auto part = trim(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        pos = comma == std::string_view::npos ? text.size() + 1 : comma + 1;
        Bound b;
        bool is_lower;
        if (part.starts_with(">=")) { is_lower = true; b.inclusive = true; part.remove_prefix(2); }
        else if (part.starts_with("<=")) { is_lower = false; b.inclusive = true; part.remove_prefix(2); }
        else if (part.starts_with(">")) { is_lower = true; part.remove_prefix(1); }
        else if (part.starts_with("<")) { is_lower = false; part.remove_prefix(1); }
        else throw Error(fmt::format("bad version constraint '{}'", text));
        part = trim(part);
        if (part.empty()) throw Error(fmt::format("bad version constraint '{}'", text));
        b.version = std::string(part);
        auto& slot = is_lower ? c.lower : c.upper;
        if (slot) throw Error(fmt::format("bad version constraint '{}': repeated bound", text));
        slot = std::move(b);
    }
    return c;
}

std::string VersionConstraint::to_string() const {
    switch (kind) {
        case Kind::any: return "any";
        case Kind::exact: return exact;
        case Kind::range: break;
    }
    std::string out;
    if (lower) out += (lower->inclusive ? ">=" : ">") + lower->version;
    if (upper) {
        if (!out.empty()) out += ",";
        out += (upper->inclusive ? "<=" : "<") + upper->version;
    }
    return out;
}

bool VersionConstraint::satisfied_by(std::string_view version) const {
    switch (kind) {
        case Kind::any: return true;
        case Kind::exact: {
            if (version == exact) return true;
            auto cmp = compare_versions(version, exact);
            return cmp && *cmp == 0;
        }
        case Kind::range: break;
    }
    if (lower) {
        auto cmp = compare_versions(version, lower->version);
        if (!cmp || *cmp < 0 || (*cmp == 0 && !lower->inclusive)) return false;
    }
    if (upper) {
        auto cmp = compare_versions(version, upper->version);
        if (!cmp || *cmp > 0 || (*cmp == 0 && !upper->inclusive)) return false;
    }
    return true;
}

}  // namespace firmgraph::vuln
