#include "firmgraph/vuln/fetch.hpp"

#include <cstdlib>
#include <cstring>

#include <fmt/format.h>
#include <httplib.h>
#include <zlib.h>

#include "firmgraph/error.hpp"

namespace firmgraph::vuln {

FetchOptions FetchOptions::from_env() {
    FetchOptions o;
    if (const char* v = std::getenv("FIRMGRAPH_EPSS_URL"); v && *v) o.epss_url = v;
    if (const char* v = std::getenv("FIRMGRAPH_KEV_URL"); v && *v) o.kev_url = v;
    if (const char* v = std::getenv("FIRMGRAPH_FETCH_TIMEOUT_MS"); v && *v) {
        char* end = nullptr;
        long ms = std::strtol(v, &end, 10);
        if (end && *end == '\0' && ms > 0) o.timeout = std::chrono::milliseconds(ms);
    }
    return o;
}

std::string http_get(std::string_view url, std::chrono::milliseconds timeout) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) throw Error(fmt::format("bad URL '{}'", url));
    auto path_start = url.find('/', scheme_end + 3);
    std::string origin(url.substr(0, path_start));
    std::string path = path_start == std::string_view::npos ? "/" : std::string(url.substr(path_start));

    httplib::Client client(origin);
    if (!client.is_valid()) throw Error(fmt::format("unsupported URL '{}'", url));
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_follow_location(true);
    auto res = client.Get(path);
    if (!res) throw Error(fmt::format("GET {}: {}", url, httplib::to_string(res.error())));
    if (res->status != 200) throw Error(fmt::format("GET {}: HTTP {}", url, res->status));
    return res->body;
}

std::string maybe_gunzip(std::string_view data) {
    if (data.size() < 2 || static_cast<unsigned char>(data[0]) != 0x1f || static_cast<unsigned char>(data[1]) != 0x8b)
        return std::string(data);
    z_stream zs;
    std::memset(&zs, 0, sizeof zs);
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw Error("gzip: init failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    std::string out;
    char buf[1 << 15];
    int rc;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof buf;
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw Error("gzip: corrupt data");
        }
        out.append(buf, sizeof buf - zs.avail_out);
    } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw Error("gzip: truncated data");
    return out;
}

ExploitIntel refresh_intel(const ExploitIntel& snapshot, const FetchOptions& options, std::vector<std::string>& warnings) {
    ExploitIntel out = snapshot;
    try {
        out.epss = load_epss_csv(maybe_gunzip(http_get(options.epss_url, options.timeout)));
    } catch (const Error& e) {
        warnings.push_back(fmt::format("EPSS refresh failed, using snapshot: {}", e.what()));
    }
    try {
        out.kev = load_kev_json(http_get(options.kev_url, options.timeout));
    } catch (const Error& e) {
        warnings.push_back(fmt::format("KEV refresh failed, using snapshot: {}", e.what()));
    }
    return out;
}

}  // namespace firmgraph::vuln
