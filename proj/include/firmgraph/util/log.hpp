#pragma once

#include <mutex>
#include <ostream>
#include <string_view>

#include <json.hpp>

namespace firmgraph::util {

enum class LogLevel { debug, info, warn, error };

/// Line-delimited JSON log: one object per record with `ts`, `level`,
/// `event` and any extra fields. Safe to share between threads.
class Logger {
public:
    Logger() = default;
    explicit Logger(std::ostream* sink, LogLevel min_level = LogLevel::info) : sink_(sink), min_(min_level) {}

    void set_sink(std::ostream* sink);
    void set_min_level(LogLevel level);

    void log(LogLevel level, std::string_view event, nlohmann::json fields = nlohmann::json::object());
    void info(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
        log(LogLevel::info, event, std::move(fields));
    }
    void warn(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
        log(LogLevel::warn, event, std::move(fields));
    }
    void error(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
        log(LogLevel::error, event, std::move(fields));
    }

private:
    std::mutex mu_;
    std::ostream* sink_ = nullptr;
    LogLevel min_ = LogLevel::info;
};

// Process-wide logger; silent until a sink is set.
Logger& logger();

}  // namespace firmgraph::util
