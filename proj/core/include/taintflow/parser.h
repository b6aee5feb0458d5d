#pragma once

#include <taintflow/ir.h>

#include <string>
#include <string_view>

namespace taintflow {

/// Parses the textual three-address IR into a finalized Program.
///
/// Statement ids follow source order. The result is exactly what the text
/// says: no SSA construction happens here (see `prepare_program`).
/// Throws ParseError (with line/column) or ResolveError.
Program parse_program(std::string_view source);

/// Renders a program back to IR text. Parsing the output yields a
/// structurally identical program.
std::string print_program(const Program& program);

std::string print_statement(const Statement& stmt);

} // namespace taintflow
