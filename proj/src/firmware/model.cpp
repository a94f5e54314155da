#include "firmgraph/firmware/model.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <utility>

#include <fmt/format.h>
#include <json.hpp>

#include "firmgraph/error.hpp"

namespace firmgraph::firmware {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<LinkType, std::string_view>, 6> kLinkNames{{
    {LinkType::environment, "environment"},
    {LinkType::socket, "socket"},
    {LinkType::file, "file"},
    {LinkType::exec, "exec"},
    {LinkType::shared_memory, "shared_memory"},
    {LinkType::border_binary, "border_binary"},
}};

// JSON pointer escaping for keys that contain '/' or '~'.
std::string pointer_token(std::string_view key) {
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

// nlohmann keeps the last of duplicate keys silently; walk the parse events
// to reject them with a location.
class DuplicateKeyGuard {
public:
    bool operator()(int, json::parse_event_t event, json& parsed) {
        switch (event) {
            case json::parse_event_t::object_start:
            case json::parse_event_t::array_start:
                frames_.push_back({child_path(), event == json::parse_event_t::object_start, {}, {}, 0});
                break;
            case json::parse_event_t::object_end:
            case json::parse_event_t::array_end:
                frames_.pop_back();
                bump();
                break;
            case json::parse_event_t::key: {
                auto& top = frames_.back();
                auto key = parsed.get<std::string>();
                if (!top.keys.insert(key).second) {
                    auto where = top.path + "/" + pointer_token(key);
                    if (top.path == "/graph") throw SchemaError(where, fmt::format("duplicate binary '{}'", key));
                    throw SchemaError(where, fmt::format("duplicate key '{}'", key));
                }
                top.last_key = key;
                break;
            }
            case json::parse_event_t::value:
                bump();
                break;
        }
        return true;
    }

private:
    struct Frame {
        std::string path;
        bool object;
        std::set<std::string> keys;
        std::string last_key;
        std::size_t index;
    };

    std::string child_path() const {
        if (frames_.empty()) return "";
        const auto& top = frames_.back();
        if (top.object) return top.path + "/" + pointer_token(top.last_key);
        return fmt::format("{}/{}", top.path, top.index);
    }

    void bump() {
        if (!frames_.empty() && !frames_.back().object) ++frames_.back().index;
    }

    std::vector<Frame> frames_;
};

const json& require(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(path + "/" + key, "required field is missing");
    return *it;
}

std::string require_string(const json& value, const std::string& path) {
    if (!value.is_string()) throw SchemaError(path, fmt::format("expected a string, found {}", value.type_name()));
    return value.get<std::string>();
}

std::vector<std::string> string_list(const json& value, const std::string& path) {
    if (!value.is_array()) throw SchemaError(path, fmt::format("expected an array, found {}", value.type_name()));
    std::vector<std::string> out;
    for (std::size_t i = 0; i < value.size(); ++i) out.push_back(require_string(value[i], fmt::format("{}/{}", path, i)));
    return out;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view to_string(LinkType type) noexcept {
    for (auto [t, name] : kLinkNames)
        if (t == type) return name;
    return "environment";
}

std::optional<LinkType> link_type_from_string(std::string_view text) noexcept {
    for (auto [t, name] : kLinkNames)
        if (name == text) return t;
    return std::nullopt;
}

FirmwareGraph load_firmware_graph(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document, DuplicateKeyGuard{});
    } catch (const json::parse_error& e) {
        throw SchemaError("/", fmt::format("invalid JSON: {}", e.what()));
    }
    if (!doc.is_object()) throw SchemaError("/", "document must be a JSON object");

    FirmwareGraph fw;
    fw.fw_name = require_string(require(doc, "", "fW_name"), "/fW_name");
    const auto& graph = require(doc, "", "graph");
    if (!graph.is_object()) throw SchemaError("/graph", "expected an object");

    for (const auto& [name, entry] : graph.items()) {
        std::string path = "/graph/" + pointer_token(name);
        if (name.empty()) throw SchemaError(path, "binary name must be nonempty");
        if (!entry.is_object()) throw SchemaError(path, "expected an object");
        Binary bin;
        const auto& peers = require(entry, path, "peers");
        if (!peers.is_array()) throw SchemaError(path + "/peers", "expected an array");
        for (std::size_t i = 0; i < peers.size(); ++i) {
            std::string ppath = fmt::format("{}/peers/{}", path, i);
            const auto& peer = peers[i];
            if (!peer.is_object()) throw SchemaError(ppath, "expected an object");
            PeerLink link;
            link.target = require_string(require(peer, ppath, "name"), ppath + "/name");
            if (link.target.empty()) throw SchemaError(ppath + "/name", "peer name must be nonempty");
            auto type_text = require_string(require(peer, ppath, "type"), ppath + "/type");
            auto type = link_type_from_string(type_text);
            if (!type) throw SchemaError(ppath + "/type", fmt::format("unknown link type '{}'", type_text));
            link.type = *type;
            if (auto it = peer.find("info"); it != peer.end()) {
                if (it->is_string()) {
                    if (!it->get<std::string>().empty()) link.info.push_back(it->get<std::string>());
                } else if (it->is_array()) {
                    link.info = string_list(*it, ppath + "/info");
                } else if (!it->is_null()) {
                    throw SchemaError(ppath + "/info", "expected a string or an array of strings");
                }
            }
            if (link.type == LinkType::border_binary && !link.info.empty())
                throw SchemaError(ppath + "/info", "border_binary links carry no info");
            bin.peers.push_back(std::move(link));
        }
        if (auto it = entry.find("version"); it != entry.end()) bin.versions = string_list(*it, path + "/version");
        fw.binaries.emplace(name, std::move(bin));
    }

    std::set<std::string> dangling;
    for (const auto& [name, bin] : fw.binaries)
        for (const auto& peer : bin.peers)
            if (peer.target != internet_sentinel && !fw.binaries.contains(peer.target)) dangling.insert(peer.target);
    for (const auto& name : dangling) {
        fw.binaries[name].implicit = true;
        fw.warnings.push_back(fmt::format("peer '{}' is not a binary of the graph", name));
    }
    return fw;
}

bool BinaryInventory::add(std::string name, std::string version) {
    InventoryEntry e{std::move(name), std::move(version)};
    if (std::find(entries.begin(), entries.end(), e) != entries.end()) return false;
    entries.push_back(std::move(e));
    return true;
}

BinaryInventory load_version_list(std::string_view text) {
    BinaryInventory inv;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (trim(line).empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string_view::npos)
            throw SchemaError(fmt::format("line {}", line_no), "expected 'name, version'");
        auto name = trim(line.substr(0, comma));
        auto version = trim(line.substr(comma + 1));
        if (name.empty() || version.empty() || version.find(',') != std::string::npos)
            throw SchemaError(fmt::format("line {}", line_no), "expected 'name, version'");
        inv.add(std::move(name), std::move(version));
    }
    return inv;
}

BinaryInventory merge_inventory(const FirmwareGraph& fw, const BinaryInventory& inv) {
    std::map<std::string, std::vector<std::string>> versions;
    auto put = [&](const std::string& name, const std::string& v) {
        auto& list = versions[name];
        if (std::find(list.begin(), list.end(), v) == list.end()) list.push_back(v);
    };
    for (const auto& [name, bin] : fw.binaries) {
        versions[name];
        for (const auto& v : bin.versions) put(name, v);
    }
    for (const auto& e : inv.entries) put(e.name, e.version);

    BinaryInventory out;
    for (auto& [name, list] : versions) {
        if (list.empty()) list.push_back("*");
        for (auto& v : list) out.entries.push_back({name, v});
    }
    return out;
}

std::string sanitize_name(std::string_view name) {
    std::string out(name);
    std::replace(out.begin(), out.end(), '-', '_');
    return out;
}

std::vector<logic::Clause> emit_topology_facts(const FirmwareGraph& fw) {
    std::map<std::string, std::string> seen;
    for (const auto& [name, bin] : fw.binaries) {
        auto [it, fresh] = seen.emplace(sanitize_name(name), name);
        if (!fresh)
            throw SchemaError("/graph/" + pointer_token(name),
                              fmt::format("binary names '{}' and '{}' collide after sanitation", it->second, name));
    }

    std::vector<logic::Clause> facts;
    for (const auto& [name, bin] : fw.binaries) {
        auto src = logic::Term::constant(sanitize_name(name));
        for (const auto& peer : bin.peers) {
            logic::Clause c;
            if (peer.type == LinkType::border_binary) {
                c.head.predicate = "externalInteraction";
                c.head.args = {logic::Term::constant("Internet", true), src, logic::Term::constant("internet")};
            } else {
                c.head.predicate = "dataFlow";
                c.head.args = {src, logic::Term::constant(sanitize_name(peer.target)),
                               logic::Term::constant(std::string(to_string(peer.type)), true)};
            }
            facts.push_back(std::move(c));
        }
    }
    return facts;
}

}  // namespace firmgraph::firmware
