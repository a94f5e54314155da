#include "firmgraph/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <fstream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "firmgraph/ag/export.hpp"
#include "firmgraph/logic/parser.hpp"
#include "firmgraph/risk/risk_model.hpp"
#include "firmgraph/service/server.hpp"
#include "firmgraph/util/fs.hpp"
#include "firmgraph/util/log.hpp"
#include "firmgraph/vuln/nvd_import.hpp"

namespace firmgraph::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

FirmwareAnalysis analyze_file(const RunConfig& config, const fs::path& path, const vuln::CveDatabase& db,
                              const std::optional<fs::path>& versions_path) {
    if (is_facts_path(path)) {
        auto text = util::read_file(path);
        try {
            return analyze_facts(path.stem().string(), logic::parse_program(text), config.analysis_options());
        } catch (const ParseError& e) {
            throw Error(fmt::format("{}:{}", path.string(), e.what()));
        } catch (const ProgramError& e) {
            throw Error(fmt::format("{}: {}", path.string(), e.what()));
        }
    }
    std::optional<firmware::BinaryInventory> versions;
    if (versions_path) {
        try {
            versions = firmware::load_version_list(util::read_file(*versions_path));
        } catch (const SchemaError& e) {
            throw e.within(versions_path->string());
        }
    }
    try {
        return analyze_firmware(firmware::load_firmware_graph(util::read_file(path)), versions, db,
                                config.analysis_options());
    } catch (const SchemaError& e) {
        throw e.within(path.string());
    }
}

std::string paths_json(const FirmwareAnalysis& a, std::size_t cap) {
    ordered_json doc = ordered_json::object();
    for (const auto& target : ag::goal_binaries(a.graph)) {
        auto arr = ordered_json::array();
        for (const auto& p : ag::enumerate_paths(a.inputs, a.graph, target, cap))
            arr.push_back({{"binaries", p.binaries}, {"flows", p.flows}, {"entry", p.internal_entry ? "internal" : "external"}});
        doc[target] = std::move(arr);
    }
    return doc.dump(2) + "\n";
}

void write_all(const RunConfig& config, const FirmwareAnalysis& a, const vuln::ExploitIntel& intel, const fs::path& dir) {
    write_analysis_artifacts(a, intel, dir);
    util::write_file_atomic(dir / "paths.json", paths_json(a, config.path_cap));
}

ordered_json metrics_object(const ag::AgMetrics& m) {
    return {{"attack_points", m.attack_points},
            {"potentially_compromised_oss", m.potentially_compromised_oss},
            {"vulnerable_binaries", m.vulnerable_binaries}};
}

void log_warnings(const std::vector<std::string>& warnings, const std::string& source) {
    for (const auto& w : warnings) util::logger().warn("warning", {{"source", source}, {"message", w}});
}

std::optional<fs::path> versions_for(const RunConfig& config, const fs::path& firmware) {
    if (is_facts_path(firmware)) return std::nullopt;
    if (config.versions) return config.versions;
    return sibling_versions(firmware);
}

}  // namespace

int cmd_analyze(const RunConfig& config, const fs::path& firmware, std::ostream& out) {
    config.validate();
    auto intel = load_intel(config);
    log_warnings(intel.warnings, "intel");
    auto a = analyze_file(config, firmware, intel.sources.db, versions_for(config, firmware));
    log_warnings(a.warnings, firmware.string());
    write_all(config, a, intel.sources.exploit, config.out);
    out << fmt::format("{}: attack_points={} potentially_compromised_oss={} vulnerable_binaries={} nodes={}\n",
                       a.fw.fw_name, a.metrics.attack_points, a.metrics.potentially_compromised_oss,
                       a.metrics.vulnerable_binaries, a.graph.proof.nodes.size());
    if (a.graph.empty()) {
        out << fmt::format("{}: no attack graph\n", a.fw.fw_name);
        return exit_no_graph;
    }
    return exit_ok;
}

int cmd_corpus(const RunConfig& config, const fs::path& directory, std::ostream& out) {
    config.validate();
    if (!fs::is_directory(directory)) throw ConfigError(fmt::format("'{}' is not a directory", directory.string()));
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(directory))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError(fmt::format("no firmware documents (*.json) in '{}'", directory.string()));

    auto intel = load_intel(config);
    log_warnings(intel.warnings, "intel");

    struct Result {
        std::optional<FirmwareAnalysis> analysis;
        std::string error;
    };
    std::vector<Result> results(files.size());
    std::atomic<std::size_t> next{0};
    unsigned workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(files.size()));

    auto work = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) {
            const auto& f = files[i];
            try {
                auto a = analyze_file(config, f, intel.sources.db, sibling_versions(f));
                log_warnings(a.warnings, f.string());
                write_all(config, a, intel.sources.exploit, config.out / f.stem());
                util::logger().info("firmware_analyzed",
                                    {{"file", f.filename().string()}, {"nodes", a.graph.proof.nodes.size()}});
                results[i].analysis = std::move(a);
            } catch (const std::exception& e) {
                util::logger().error("firmware_failed", {{"file", f.filename().string()}, {"error", e.what()}});
                results[i].error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    std::vector<ag::AgMetrics> metrics;
    std::vector<risk::FirmwareRiskInput> risk_inputs;
    auto report = ordered_json::array();
    std::size_t analyzed = 0, failed = 0, without = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        ordered_json row;
        row["file"] = files[i].filename().string();
        const auto& r = results[i];
        if (!r.analysis) {
            ++failed;
            row["status"] = "failed";
            row["error"] = r.error;
        } else {
            ++analyzed;
            const auto& a = *r.analysis;
            bool has_graph = !a.graph.empty();
            if (!has_graph) ++without;
            row["fw_name"] = a.fw.fw_name;
            row["status"] = has_graph ? "ok" : "no_ag";
            row["metrics"] = metrics_object(a.metrics);
            if (has_graph || config.include_empty) metrics.push_back(a.metrics);
            risk_inputs.push_back({&a.graph, &a.matches});
        }
        report.push_back(std::move(row));
    }

    ordered_json summary;
    summary["firmware"] = files.size();
    summary["analyzed"] = analyzed;
    summary["failed"] = failed;
    summary["without_attack_graph"] = without;
    summary["include_empty"] = config.include_empty;
    summary["results"] = std::move(report);
    util::write_file_atomic(config.out / "corpus_report.json", summary.dump(2) + "\n");

    if (!metrics.empty())
        util::write_file_atomic(config.out / "corpus_stats.json", risk::corpus_stats_json(risk::corpus_stats(metrics)));
    auto rows = risk::binary_risk_table(risk_inputs, intel.sources.exploit);
    util::write_file_atomic(config.out / "risk_table.csv", risk::risk_table_csv(rows));
    util::write_file_atomic(config.out / "risk_table.json", risk::risk_table_json(rows));

    out << fmt::format("{} firmware: {} analyzed ({} without attack graph), {} failed\n", files.size(), analyzed,
                       without, failed);
    return analyzed == 0 ? exit_error : exit_ok;
}

int cmd_whatif(const RunConfig& config, const fs::path& firmware, std::ostream& out) {
    config.validate();
    auto intel = load_intel(config);
    log_warnings(intel.warnings, "intel");
    auto a = analyze_file(config, firmware, intel.sources.db, versions_for(config, firmware));
    log_warnings(a.warnings, firmware.string());
    write_all(config, a, intel.sources.exploit, config.out / "base");

    auto result = ag::whatif_patch(a.inputs, ag::shipped_ruleset(config.ruleset), config.patched,
                                   config.analysis_options().eval);
    for (const auto& name : result.unknown)
        util::logger().warn("unknown_patch_target", {{"binary", name}, {"file", firmware.string()}});

    FirmwareAnalysis patched = a;
    patched.inputs = ag::apply_patch(a.inputs, config.patched);
    patched.graph = std::move(result.graph);
    patched.metrics = ag::metrics(patched.graph);
    write_all(config, patched, intel.sources.exploit, config.out / "patched");

    auto d = ag::diff(a.graph, patched.graph);
    ordered_json doc;
    doc["fw_name"] = a.fw.fw_name;
    doc["patched"] = config.patched;
    doc["unknown"] = result.unknown;
    doc["removed_nodes"] = d.removed_nodes;
    doc["added_nodes"] = d.added_nodes;
    doc["metrics_before"] = metrics_object(d.before);
    doc["metrics_after"] = metrics_object(d.after);
    auto delta = [](std::size_t x, std::size_t y) { return static_cast<long long>(y) - static_cast<long long>(x); };
    doc["metrics_delta"] = {{"attack_points", delta(d.before.attack_points, d.after.attack_points)},
                            {"potentially_compromised_oss",
                             delta(d.before.potentially_compromised_oss, d.after.potentially_compromised_oss)},
                            {"vulnerable_binaries", delta(d.before.vulnerable_binaries, d.after.vulnerable_binaries)}};
    util::write_file_atomic(config.out / "whatif.json", doc.dump(2) + "\n");

    for (const auto& name : result.unknown) out << fmt::format("warning: '{}' is not a binary of {}\n", name, a.fw.fw_name);
    out << fmt::format("{}: removed {} nodes; vulnerable_binaries {} -> {}\n", a.fw.fw_name, d.removed_nodes,
                       d.before.vulnerable_binaries, d.after.vulnerable_binaries);
    return patched.graph.empty() ? exit_no_graph : exit_ok;
}

namespace {

int cmd_export(const RunConfig& config, const fs::path& facts, const std::optional<fs::path>& rules,
               const std::string& format, const std::vector<std::string>& goal_predicates,
               const std::optional<fs::path>& output, std::ostream& out) {
    auto program = logic::parse_program(util::read_file(facts));
    if (rules) program.append(logic::parse_program(util::read_file(*rules)));
    else program.append(ag::shipped_ruleset(config.ruleset).rules);

    auto ds = logic::evaluate(program, config.analysis_options().eval);
    std::vector<logic::FactId> goals;
    for (logic::FactId id = 0; id < ds.size(); ++id) {
        if (ds.is_input(id)) continue;
        const auto& p = ds.literal(id).predicate;
        bool wanted = goal_predicates.empty() ? ag::is_goal_predicate(p)
                                              : std::find(goal_predicates.begin(), goal_predicates.end(), p) != goal_predicates.end();
        if (wanted) goals.push_back(id);
    }
    auto graph = logic::build_proof_graph_detailed(program, ds, goals).graph;
    auto text = format == "dot" ? ag::export_dot(graph) : ag::export_json(graph);
    if (output) util::write_file_atomic(*output, text);
    else out << text;
    return graph.empty() ? exit_no_graph : exit_ok;
}

std::atomic<service::Server*> g_server{nullptr};

extern "C" void stop_server(int) {
    if (auto* s = g_server.load()) s->stop();
}

int cmd_serve(const RunConfig& config, service::ServerConfig sc, std::ostream& out) {
    config.validate(false);
    std::shared_ptr<const IntelSources> intel;
    std::string digest;
    if (!config.cve_db.empty()) {
        auto loaded = load_intel(config);
        log_warnings(loaded.warnings, "intel");
        intel = std::make_shared<const IntelSources>(std::move(loaded.sources));
        digest = loaded.digest;
    } else {
        util::logger().warn("no_intel", {{"message", "no CVE snapshot; analysis requests will answer 503"}});
    }
    sc.ruleset = config.ruleset;
    sc.eval = config.analysis_options().eval;
    service::Server server(sc, intel, digest);
    int port = server.bind();
    if (port < 0) throw Error(fmt::format("cannot bind {}:{}", sc.host, sc.port));
    out << fmt::format("listening on http://{}:{}\n", sc.host, port) << std::flush;
    g_server = &server;
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);
    server.serve();
    g_server = nullptr;
    return exit_ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Firmware attack-graph generation and binary risk assessment", "firmgraph"};
    app.set_config("--config", "", "Configuration file (TOML/INI)");
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig config;
    std::string ruleset = "combined";
    std::string log_path;
    std::string log_level = "info";
    bool exclude_empty = false;

    app.add_option("--cve-db", config.cve_db, "CVE snapshot (JSON)")->envname("FIRMGRAPH_CVE_DB");
    app.add_option("--epss", config.epss, "EPSS snapshot (cve,epss,percentile)")->envname("FIRMGRAPH_EPSS");
    app.add_option("--kev", config.kev, "KEV catalog (JSON)")->envname("FIRMGRAPH_KEV");
    app.add_flag("--refresh-intel", config.refresh_intel, "Download current EPSS and KEV data");
    app.add_option("--ruleset", ruleset, "Rules: external, internal or combined")
        ->check(CLI::IsMember({"external", "internal", "combined", "external_threat", "internal_threat"}));
    app.add_option("--out", config.out, "Output directory");
    app.add_option("--derivation-cap", config.derivation_cap, "Maximum derived facts per evaluation");
    app.add_option("--path-cap", config.path_cap, "Maximum attack paths per target");
    app.add_option("--workers", config.workers, "Parallel firmware analyses (0: one per processor)");
    app.add_flag("--exclude-empty", exclude_empty, "Leave firmware without attack graph out of corpus means");
    app.add_option("--log", log_path, "Write JSON-lines log here instead of stderr");
    app.add_option("--log-level", log_level, "debug, info, warn or error")
        ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

    std::string target;
    std::string versions;
    std::vector<std::string> patched;

    auto* analyze = app.add_subcommand("analyze", "Analyze one firmware graph");
    analyze->add_option("firmware", target, "Firmware graph document")->required();
    analyze->add_option("--versions", versions, "Version list (name, version per line)");

    auto* corpus = app.add_subcommand("corpus", "Analyze every *.json firmware graph in a directory");
    corpus->add_option("directory", target, "Directory of firmware graph documents")->required();

    auto* whatif = app.add_subcommand("whatif", "Regenerate the attack graph with binaries patched");
    whatif->add_option("firmware", target, "Firmware graph document")->required();
    whatif->add_option("--versions", versions, "Version list");
    whatif->add_option("--patched", patched, "Binaries to patch")->delimiter(',');

    std::string facts, rules, format = "dot", output;
    std::vector<std::string> goal_predicates;
    auto* exp = app.add_subcommand("export", "Evaluate a Datalog file and print its attack graph");
    exp->add_option("facts", facts, "Datalog facts (and rules)")->required();
    exp->add_option("--rules", rules, "Rules file used instead of the shipped ruleset");
    exp->add_option("--format", format, "dot or json")->check(CLI::IsMember({"dot", "json"}));
    exp->add_option("--goal", goal_predicates, "Goal predicate (repeatable)");
    exp->add_option("-o,--output", output, "Write to this file instead of stdout");

    std::string nvd_in, nvd_out;
    auto* nvd = app.add_subcommand("import-nvd", "Convert an NVD 2.0 response into a CVE snapshot");
    nvd->add_option("input", nvd_in, "NVD 2.0 JSON")->required();
    nvd->add_option("-o,--output", nvd_out, "Snapshot file")->required();

    service::ServerConfig sc;
    std::string ui_dir, persist_dir;
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    serve->add_option("--host", sc.host, "Listen address");
    serve->add_option("--port", sc.port, "Listen port");
    serve->add_option("--ui-dir", ui_dir, "Static UI bundle to serve at /");
    serve->add_option("--persist-dir", persist_dir, "Directory for snapshot persistence");
    serve->add_option("--cors-origin", sc.cors_origin, "Allowed CORS origin");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }

    std::ofstream log_file;
    std::ostream* sink = &err;
    if (log_path.empty() && *corpus) {
        std::error_code ec;
        fs::create_directories(config.out, ec);
        log_path = (config.out / "run.log.jsonl").string();
    }
    if (!log_path.empty()) {
        log_file.open(log_path, std::ios::app);
        if (!log_file) {
            err << "error: cannot open log file " << log_path << "\n";
            return exit_error;
        }
        sink = &log_file;
    }
    auto& logger = util::logger();
    logger.set_sink(sink);
    logger.set_min_level(log_level == "debug" ? util::LogLevel::debug
                         : log_level == "warn" ? util::LogLevel::warn
                         : log_level == "error" ? util::LogLevel::error
                                                : util::LogLevel::info);
    struct ResetSink {
        ~ResetSink() { util::logger().set_sink(nullptr); }
    } reset;

    config.ruleset = *ag::ruleset_kind_from_string(ruleset);
    config.include_empty = !exclude_empty;
    config.patched = {patched.begin(), patched.end()};
    if (!versions.empty()) config.versions = versions;

    try {
        if (*analyze) return cmd_analyze(config, target, out);
        if (*corpus) return cmd_corpus(config, target, out);
        if (*whatif) return cmd_whatif(config, target, out);
        if (*exp) {
            config.validate(false);
            return cmd_export(config, facts, rules.empty() ? std::nullopt : std::optional<fs::path>(rules), format,
                              goal_predicates, output.empty() ? std::nullopt : std::optional<fs::path>(output), out);
        }
        if (*nvd) {
            auto imported = vuln::import_nvd(util::read_file(nvd_in));
            log_warnings(imported.warnings, nvd_in);
            util::write_file_atomic(nvd_out, vuln::dump_cve_db(imported.records));
            out << fmt::format("{} records written to {}\n", imported.records.size(), nvd_out);
            return exit_ok;
        }
        if (*serve) {
            if (!ui_dir.empty()) sc.ui_dir = ui_dir;
            if (!persist_dir.empty()) sc.persist_dir = persist_dir;
            return cmd_serve(config, sc, out);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
    return exit_error;
}

}  // namespace firmgraph::cli
