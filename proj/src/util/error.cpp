#include "firmgraph/error.hpp"

#include <fmt/format.h>

namespace firmgraph {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : Error(fmt::format("{}:{}: {}", line, column, what)), line_(line), column_(column) {}

ArityError::ArityError(std::string predicate, std::size_t first, std::size_t second)
    : ProgramError(fmt::format("predicate '{}' used with arity {} and arity {}", predicate, first, second)),
      predicate_(std::move(predicate)),
      first_(first),
      second_(second) {}

SchemaError::SchemaError(std::string path, std::string message)
    : Error(fmt::format("{}: {}", path, message)), path_(std::move(path)), message_(std::move(message)) {}

SchemaError SchemaError::within(const std::string& prefix) const {
    return SchemaError(path_.empty() ? prefix : prefix + ":" + path_, message_);
}

}  // namespace firmgraph
