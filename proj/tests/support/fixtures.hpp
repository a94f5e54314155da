#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "firmgraph/logic/ast.hpp"
#include "firmgraph/logic/parser.hpp"
#include "firmgraph/util/fs.hpp"

namespace firmgraph::testing {

inline std::filesystem::path fixture_path(const std::string& name) { return std::filesystem::path(FIRMGRAPH_FIXTURES) / name; }

inline std::string fixture(const std::string& name) { return util::read_file(fixture_path(name)); }

// Canonical clause texts, sorted: a multiset view for comparisons.
inline std::vector<std::string> clause_texts(const std::vector<logic::Clause>& clauses) {
    std::vector<std::string> out;
    for (const auto& c : clauses) out.push_back(logic::format_clause(c));
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<std::string> clause_texts(const logic::Program& program) { return clause_texts(program.clauses()); }

// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("firmgraph-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace firmgraph::testing
