#include "firmgraph/util/log.hpp"

#include <chrono>
#include <ctime>

#include <fmt/chrono.h>
#include <fmt/format.h>

namespace firmgraph::util {

namespace {

const char* level_name(LogLevel level) {
    switch (level) {
        case LogLevel::debug: return "debug";
        case LogLevel::info: return "info";
        case LogLevel::warn: return "warn";
        case LogLevel::error: return "error";
    }
    return "info";
}

std::string timestamp() {
    auto now = std::chrono::system_clock::now();
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    return fmt::format("{:%Y-%m-%dT%H:%M:%S}.{:03}Z", fmt::gmtime(t), ms);
}

}  // namespace

void Logger::set_sink(std::ostream* sink) {
    std::lock_guard lock(mu_);
    sink_ = sink;
}

void Logger::set_min_level(LogLevel level) {
    std::lock_guard lock(mu_);
    min_ = level;
}

void Logger::log(LogLevel level, std::string_view event, nlohmann::json fields) {
    std::lock_guard lock(mu_);
    if (!sink_ || level < min_) return;
    nlohmann::ordered_json rec;
    rec["ts"] = timestamp();
    rec["level"] = level_name(level);
    rec["event"] = std::string(event);
    if (fields.is_object())
        for (auto& [k, v] : fields.items()) rec[k] = v;
    *sink_ << rec.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    sink_->flush();
}

Logger& logger() {
    static Logger instance;
    return instance;
}

}  // namespace firmgraph::util
