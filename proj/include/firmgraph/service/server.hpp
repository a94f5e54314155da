#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "firmgraph/ag/ruleset.hpp"
#include "firmgraph/logic/evaluator.hpp"
#include "firmgraph/pipeline.hpp"
#include "firmgraph/service/snapshot_store.hpp"

namespace firmgraph::service {

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::optional<std::filesystem::path> ui_dir;
    std::optional<std::filesystem::path> persist_dir;
    std::string cors_origin;  // empty disables CORS headers
    ag::RulesetKind ruleset = ag::RulesetKind::combined;
    logic::EvalOptions eval;
};

/// HTTP/JSON API over analysis snapshots:
///
///     POST /api/firmware                      analyze, 201 {id, metrics, goal_binaries, ...}
///                                             body: graph document, {firmware, versions}
///                                             or {name, facts}
///     GET  /api/snapshots/{id}                summary
///     GET  /api/snapshots/{id}/graph?format=  json (default) or dot
///     POST /api/snapshots/{id}/whatif         {patched: [...]} -> 201 child + diff
///     GET  /api/snapshots/{id}/risk           per-snapshot risk rows
///     GET  /api/snapshots/{id}/paths?target=  attack paths to a binary
///
/// Without intel (`intel` null) analysis requests answer 503.
class Server {
public:
    Server(ServerConfig config, std::shared_ptr<const IntelSources> intel, std::string intel_digest);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and serves until stop(); returns false when binding fails.
    bool listen();
    /// Binds now (port 0 picks one) and returns the port, or -1.
    int bind();
    /// Serves on a socket bound by bind().
    bool serve();
    void stop();
    void wait_until_ready() const;

    SnapshotStore& store() noexcept { return store_; }

    /// Runs the pipeline for a firmware document and stores the snapshot.
    /// Throws SchemaError for invalid documents.
    std::shared_ptr<const Snapshot> create_snapshot(const std::string& firmware_document, const std::string& versions_text);
    /// Same for a Datalog facts text. Throws ParseError/ProgramError.
    std::shared_ptr<const Snapshot> create_facts_snapshot(const std::string& name, const std::string& facts_text);
    std::shared_ptr<const Snapshot> create_whatif(const Snapshot& parent, const std::set<std::string>& patched,
                                                  std::vector<std::string>* unknown = nullptr);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    ServerConfig config_;
    std::shared_ptr<const IntelSources> intel_;
    std::string intel_digest_;
    SnapshotStore store_;
};

}  // namespace firmgraph::service
