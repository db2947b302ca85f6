#pragma once

#include <optional>
#include <string>

#include "sea/ast.hpp"

namespace sea {

// Parses raw, un-preprocessed C source into a syntax tree. Regions that do
// not parse (macro residue, conditional compilation, exotic syntax) become
// Error nodes; the function itself never throws on malformed C. The result
// is a pure function of (path, source_text).
SyntaxTree parse_file(const std::string& path, std::string source_text);

// Parses a single C expression from a text snippet. Returns nullopt when the
// snippet does not form an expression. Used to re-analyze expression texts
// stored in the context database.
std::optional<SyntaxNode> parse_expression_text(std::string_view text);

}  // namespace sea
