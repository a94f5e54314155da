#include "firmgraph/util/fs.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <system_error>
#include <thread>

#include <fmt/format.h>

#include "firmgraph/error.hpp"

namespace firmgraph::util {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::error_code ec;
    if (!fs::exists(path, ec)) throw NotFoundError(fmt::format("{}: no such file", path.string()));
    if (fs::is_directory(path, ec)) throw Error(fmt::format("{}: is a directory", path.string()));
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("{}: cannot open for reading", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(fmt::format("{}: read failed", path.string()));
    return std::move(buf).str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    static std::atomic<unsigned> counter{0};
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    fs::path tmp = path;
    tmp += fmt::format(".tmp{:x}.{}", tid & 0xffffff, counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(fmt::format("{}: cannot open for writing", tmp.string()));
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error(fmt::format("{}: write failed", path.string()));
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(fmt::format("{}: rename failed", path.string()));
    }
}

}  // namespace firmgraph::util
