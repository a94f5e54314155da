#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "firmgraph/cli/config.hpp"

namespace firmgraph::cli {

// Exit statuses.
inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_no_graph = 2;

/// Command-line entry point: `firmgraph <analyze|corpus|whatif|export|import-nvd|serve> ...`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_analyze(const RunConfig& config, const std::filesystem::path& firmware, std::ostream& out);
int cmd_corpus(const RunConfig& config, const std::filesystem::path& directory, std::ostream& out);
int cmd_whatif(const RunConfig& config, const std::filesystem::path& firmware, std::ostream& out);

}  // namespace firmgraph::cli
