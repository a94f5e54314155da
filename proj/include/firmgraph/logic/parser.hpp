#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "firmgraph/logic/ast.hpp"

namespace firmgraph::logic {

/// Parses `.P`-style clause text into a validated Program.
///
/// Grammar (whitespace between tokens is insignificant):
///
///     program  := { clause }
///     clause   := literal [ ":-" literal { "," literal } ] "."
///     literal  := predicate [ "(" term { "," term } ")" ]
///     term     := identifier | integer | 'quoted' | "quoted"
///
/// `%` starts a comment that runs to end of line. A comment of the form
/// `%! text` labels the clause that follows it.
///
/// Throws ParseError (with line/column) on malformed text and
/// ProgramError/ArityError when a clause violates a Program invariant.
Program parse_program(std::string_view source);

/// Parses a single literal such as `vulnerableSoftware(wget)`.
Literal parse_literal(std::string_view source);

std::string format_term(const Term& term);
std::string format_literal(const Literal& literal);

/// Canonical text of a clause. parse_program(format_clause(c)) yields a
/// clause equal to c. A labelled clause is preceded by its `%!` line.
std::string format_clause(const Clause& clause);

std::string format_program(const Program& program);

/// Text for a constant with quoting applied only where the grammar needs it.
std::string canonical_constant(std::string_view text);

}  // namespace firmgraph::logic
