#include "firmgraph/service/snapshot_store.hpp"

#include <mutex>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "firmgraph/error.hpp"
#include "firmgraph/util/fs.hpp"
#include "firmgraph/util/log.hpp"

namespace firmgraph::service {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
    std::string out;
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
    return out;
}

std::string snapshot_id(const std::string& inputs_digest, ag::RulesetKind ruleset, const std::set<std::string>& patched,
                        const std::optional<std::string>& parent) {
    std::string material = "snapshot\n" + inputs_digest + "\n" + std::string(ag::to_string(ruleset)) + "\n" +
                           parent.value_or("-") + "\n";
    for (const auto& p : patched) material += p + "\x1f";
    return sha256_hex(material).substr(0, 32);
}

SnapshotStore::SnapshotStore(std::optional<std::filesystem::path> persist_dir) : dir_(std::move(persist_dir)) {
    if (dir_) std::filesystem::create_directories(*dir_);
}

std::shared_ptr<const Snapshot> SnapshotStore::get(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = snapshots_.find(id);
    return it == snapshots_.end() ? nullptr : it->second;
}

std::shared_ptr<const Snapshot> SnapshotStore::put(Snapshot snapshot) {
    auto ptr = std::make_shared<const Snapshot>(std::move(snapshot));
    {
        std::unique_lock lock(mu_);
        auto [it, fresh] = snapshots_.emplace(ptr->id, ptr);
        if (!fresh) return it->second;
    }
    if (dir_) persist(*ptr);
    return ptr;
}

std::size_t SnapshotStore::size() const {
    std::shared_lock lock(mu_);
    return snapshots_.size();
}

void SnapshotStore::persist(const Snapshot& s) const {
    nlohmann::ordered_json doc;
    doc["id"] = s.id;
    doc["parent"] = s.parent ? nlohmann::ordered_json(*s.parent) : nlohmann::ordered_json(nullptr);
    doc["ruleset"] = std::string(ag::to_string(s.ruleset));
    doc["patched"] = s.patched;
    if (s.facts_text.empty()) {
        doc["firmware"] = s.firmware_document;
        doc["versions"] = s.versions_text;
    } else {
        doc["name"] = s.fw_name;
        doc["facts"] = s.facts_text;
    }
    try {
        util::write_file_atomic(*dir_ / (s.id + ".json"), doc.dump(2) + "\n");
    } catch (const Error& e) {
        util::logger().warn("snapshot_persist_failed", {{"id", s.id}, {"error", e.what()}});
    }
}

std::vector<SnapshotStore::Persisted> SnapshotStore::load_persisted() const {
    std::vector<Persisted> roots, children;
    if (!dir_ || !std::filesystem::is_directory(*dir_)) return {};
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(*dir_))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        try {
            auto doc = nlohmann::json::parse(util::read_file(f));
            Persisted p;
            p.id = doc.at("id").get<std::string>();
            if (!doc.at("parent").is_null()) p.parent = doc.at("parent").get<std::string>();
            auto kind = ag::ruleset_kind_from_string(doc.at("ruleset").get<std::string>());
            if (!kind) throw Error("unknown ruleset");
            p.ruleset = *kind;
            p.patched = doc.at("patched").get<std::set<std::string>>();
            if (doc.contains("facts")) {
                p.facts_text = doc.at("facts").get<std::string>();
                p.fw_name = doc.at("name").get<std::string>();
            } else {
                p.firmware_document = doc.at("firmware").get<std::string>();
                p.versions_text = doc.at("versions").get<std::string>();
            }
            (p.parent ? children : roots).push_back(std::move(p));
        } catch (const std::exception& e) {
            util::logger().warn("snapshot_load_failed", {{"file", f.string()}, {"error", e.what()}});
        }
    }
    roots.insert(roots.end(), std::make_move_iterator(children.begin()), std::make_move_iterator(children.end()));
    return roots;
}

}  // namespace firmgraph::service
