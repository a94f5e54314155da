#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace firmgraph {

// Base of every error the library throws. Callers that only need a message
// catch this; the subclasses carry structured context.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed Datalog text. Line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what);

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

// A syntactically valid clause that violates a program invariant
// (arity consistency, range restriction, ground facts).
class ProgramError : public Error {
public:
    using Error::Error;
};

class ArityError : public ProgramError {
public:
    ArityError(std::string predicate, std::size_t first, std::size_t second);

    const std::string& predicate() const noexcept { return predicate_; }
    std::size_t first_arity() const noexcept { return first_; }
    std::size_t second_arity() const noexcept { return second_; }

private:
    std::string predicate_;
    std::size_t first_;
    std::size_t second_;
};

// The derived-fact cap was hit during evaluation.
class ResourceLimitError : public Error {
public:
    using Error::Error;
};

// Structured-document validation failure. `path` is a JSON-pointer-like
// location ("/graph/uhttpd/peers/2/type") or "line N" for text inputs.
class SchemaError : public Error {
public:
    SchemaError(std::string path, std::string message);

    const std::string& path() const noexcept { return path_; }
    const std::string& message() const noexcept { return message_; }
    // Same error with `prefix` (e.g. a file name) put in front of the path.
    SchemaError within(const std::string& prefix) const;

private:
    std::string path_;
    std::string message_;
};

// Lookup of a goal, target, or snapshot that does not exist.
class NotFoundError : public Error {
public:
    using Error::Error;
};

}  // namespace firmgraph
