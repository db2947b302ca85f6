#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sea {

// Half-open byte range plus 1-based line/column endpoints. Columns count
// bytes, not display width, so positions are stable across encodings.
struct SourceSpan {
  std::string file;
  int start_line = 1;
  int start_col = 1;
  int end_line = 1;
  int end_col = 1;
  std::size_t byte_begin = 0;
  std::size_t byte_end = 0;

  bool contains(const SourceSpan& other) const {
    return byte_begin <= other.byte_begin && other.byte_end <= byte_end;
  }
  bool overlaps(const SourceSpan& other) const {
    return byte_begin < other.byte_end && other.byte_begin < byte_end;
  }
  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class NodeKind {
  TranslationUnit,
  Preproc,       // one preprocessor directive line (with continuations)
  Typedef,       // name = alias; type = underlying
  StructDef,     // struct/union definition with body; name = tag (may be "")
  EnumDef,
  Declaration,   // one declarator; name = declared entity; type set
  FunctionDecl,  // prototype
  FunctionDef,
  Parameter,
  Block,
  Statement,     // control-flow statement wrapper; aux = keyword
  ExprStatement,
  Initializer,   // brace-enclosed initializer list
  InitItem,      // one initializer element; name = designator field if any
  Assignment,    // aux = operator; children = {lhs, rhs}
  Ternary,
  Binary,        // aux = operator
  Unary,         // aux = operator (prefix)
  Postfix,       // aux = "++" / "--"
  Cast,          // aux = type text; children = {operand}
  SizeofExpr,
  Call,          // children[0] = callee, children[1..] = arguments
  Index,         // children = {base, subscript}
  Member,        // children = {base}; name = field; aux = "->" or "."
  Identifier,    // name = spelling
  Literal,       // name = spelling; aux = "int"/"float"/"string"/"char"
  Paren,
  CompoundLiteral,  // aux = type text
  Error,
};

const char* node_kind_name(NodeKind k);

// Syntactic type info attached to declarations before any alias resolution.
struct TypeSyntax {
  std::string base_text;     // "unsigned long", "struct foo", alias name, ...
  int pointer_depth = 0;     // declarator stars plus array dimensions
  bool is_function = false;  // function declarator (fn pointer when depth > 0)
  bool unknown = false;      // a parse error touched this declaration

  friend bool operator==(const TypeSyntax&, const TypeSyntax&) = default;
};

struct SyntaxNode {
  NodeKind kind = NodeKind::Error;
  SourceSpan span;
  std::string name;  // identifier spelling / declared name / field name
  std::string aux;   // operator, storage class, directive, cast type
  std::optional<TypeSyntax> type;
  std::string text;  // exact source slice
  std::vector<SyntaxNode> children;

  bool is_expression() const {
    switch (kind) {
      case NodeKind::Assignment:
      case NodeKind::Ternary:
      case NodeKind::Binary:
      case NodeKind::Unary:
      case NodeKind::Postfix:
      case NodeKind::Cast:
      case NodeKind::SizeofExpr:
      case NodeKind::Call:
      case NodeKind::Index:
      case NodeKind::Member:
      case NodeKind::Identifier:
      case NodeKind::Literal:
      case NodeKind::Paren:
      case NodeKind::CompoundLiteral:
        return true;
      default:
        return false;
    }
  }
};

struct ParseDiagnostics {
  std::string file;
  std::vector<SourceSpan> error_regions;
  bool parse_succeeded = true;
  std::vector<std::string> notes;

  bool clean() const { return error_regions.empty(); }
};

struct SyntaxTree {
  std::string file;  // project-relative, forward slashes
  std::string source;
  SyntaxNode root;
  ParseDiagnostics diagnostics;
};

// Depth-first pre-order visit. Visitor returns false to skip a subtree.
template <typename F>
void walk(const SyntaxNode& node, F&& fn) {
  if (!fn(node)) return;
  for (const auto& child : node.children) walk(child, fn);
}

// Like walk() but tracks the parent chain (outermost first).
template <typename F>
void walk_with_parents(const SyntaxNode& node,
                       std::vector<const SyntaxNode*>& parents, F&& fn) {
  if (!fn(node, parents)) return;
  parents.push_back(&node);
  for (const auto& child : node.children) walk_with_parents(child, parents, fn);
  parents.pop_back();
}

}  // namespace sea
