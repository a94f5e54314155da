#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "firmgraph/ag/attack_graph.hpp"
#include "firmgraph/risk/risk_model.hpp"
#include "firmgraph/vuln/matching.hpp"

namespace firmgraph::service {

/// One analysis state. Immutable once stored; a what-if creates a child
/// whose patch set applies to the root's inputs.
struct Snapshot {
    std::string id;
    std::optional<std::string> parent;
    std::string inputs_digest;
    std::string fw_name;
    // Raw inputs, kept for persistence.
    std::string firmware_document;
    std::string versions_text;
    std::string facts_text;  // set instead of the two above for fact uploads
    ag::RulesetKind ruleset = ag::RulesetKind::combined;

    ag::AgInputs base_inputs;
    std::vector<vuln::VulnMatch> matches;
    std::vector<std::string> warnings;

    std::set<std::string> patched;
    ag::AttackGraph graph;
    ag::AgMetrics metrics;
    std::vector<risk::BinaryRiskRow> risk_rows;
};

/// SHA-256 of `data` as lowercase hex.
std::string sha256_hex(std::string_view data);

/// Content-derived id for a snapshot of `inputs_digest` under `ruleset`,
/// `patched` and `parent`.
std::string snapshot_id(const std::string& inputs_digest, ag::RulesetKind ruleset, const std::set<std::string>& patched,
                        const std::optional<std::string>& parent);

/// Concurrent id -> snapshot map. With a directory, every stored snapshot is
/// also written there as `<id>.json` (inputs and patch set only).
class SnapshotStore {
public:
    explicit SnapshotStore(std::optional<std::filesystem::path> persist_dir = std::nullopt);

    std::shared_ptr<const Snapshot> get(const std::string& id) const;
    /// Stores unless the id is taken; returns the stored value either way.
    std::shared_ptr<const Snapshot> put(Snapshot snapshot);
    std::size_t size() const;

    struct Persisted {
        std::string id;
        std::optional<std::string> parent;
        std::string firmware_document;
        std::string versions_text;
        std::string fw_name;
        std::string facts_text;
        ag::RulesetKind ruleset;
        std::set<std::string> patched;
    };
    /// Records found in the persistence directory, roots first.
    std::vector<Persisted> load_persisted() const;

private:
    void persist(const Snapshot& s) const;

    std::optional<std::filesystem::path> dir_;
    mutable std::shared_mutex mu_;
    std::map<std::string, std::shared_ptr<const Snapshot>> snapshots_;
};

}  // namespace firmgraph::service
