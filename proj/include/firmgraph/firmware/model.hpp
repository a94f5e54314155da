#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "firmgraph/logic/ast.hpp"

namespace firmgraph::firmware {

enum class LinkType { environment, socket, file, exec, shared_memory, border_binary };

std::string_view to_string(LinkType type) noexcept;
std::optional<LinkType> link_type_from_string(std::string_view text) noexcept;

// Peer name marking a link to the outside world.
inline constexpr std::string_view internet_sentinel = "INTERNET";

struct PeerLink {
    std::string target;
    LinkType type = LinkType::environment;
    std::vector<std::string> info;

    friend bool operator==(const PeerLink&, const PeerLink&) = default;
};

struct Binary {
    std::vector<PeerLink> peers;
    std::vector<std::string> versions;
    // Referenced as a peer but absent from the document's graph.
    bool implicit = false;

    friend bool operator==(const Binary&, const Binary&) = default;
};

struct FirmwareGraph {
    std::string fw_name;
    std::map<std::string, Binary> binaries;
    // Non-fatal findings (dangling peer targets).
    std::vector<std::string> warnings;
};

/// Parses and validates a firmware graph document:
///
///     {"fW_name": "...", "graph": {"<binary>": {"peers": [{"name", "type", "info"}], "version": [...]}}}
///
/// `info` may be a string or an array of strings; the empty string means no
/// annotations. Peers naming a binary outside the graph are kept and the
/// binary is added as implicit, with a warning.
///
/// Throws SchemaError whose path locates the offending field
/// (e.g. "/graph/uhttpd/peers/2/type").
FirmwareGraph load_firmware_graph(std::string_view document);

struct InventoryEntry {
    std::string name;
    std::string version;  // "*" when unknown

    friend bool operator==(const InventoryEntry&, const InventoryEntry&) = default;
};

struct BinaryInventory {
    std::vector<InventoryEntry> entries;

    bool empty() const noexcept { return entries.empty(); }
    std::size_t size() const noexcept { return entries.size(); }
    // Adds unless the pair is already present.
    bool add(std::string name, std::string version);
};

/// Parses `name, version` lines. Blank lines are skipped.
/// Throws SchemaError("line N", ...) on a malformed line.
BinaryInventory load_version_list(std::string_view text);

/// Union of the graph's `version` arrays and `inv`, grouped by binary name in
/// name order. Graph binaries with no version from either source get `*`.
BinaryInventory merge_inventory(const FirmwareGraph& fw, const BinaryInventory& inv);

/// Binary name as a Datalog constant text: `-` becomes `_`.
std::string sanitize_name(std::string_view name);

/// dataFlow/3 and externalInteraction/3 facts for the graph, ordered by
/// source binary then peer order.
///
/// Throws SchemaError when two binary names collide after sanitation.
std::vector<logic::Clause> emit_topology_facts(const FirmwareGraph& fw);

}  // namespace firmgraph::firmware
