#include "sea/parser.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <string>
#include <utility>

#include "sea/lexer.hpp"

namespace sea {

const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::TranslationUnit: return "translation-unit";
    case NodeKind::Preproc: return "preproc";
    case NodeKind::Typedef: return "typedef";
    case NodeKind::StructDef: return "struct-definition";
    case NodeKind::EnumDef: return "enum-definition";
    case NodeKind::Declaration: return "declaration";
    case NodeKind::FunctionDecl: return "function-declaration";
    case NodeKind::FunctionDef: return "function-definition";
    case NodeKind::Parameter: return "parameter";
    case NodeKind::Block: return "block";
    case NodeKind::Statement: return "statement";
    case NodeKind::ExprStatement: return "expression-statement";
    case NodeKind::Initializer: return "initializer";
    case NodeKind::InitItem: return "initializer-item";
    case NodeKind::Assignment: return "assignment-expression";
    case NodeKind::Ternary: return "ternary-expression";
    case NodeKind::Binary: return "binary-expression";
    case NodeKind::Unary: return "unary-expression";
    case NodeKind::Postfix: return "postfix-expression";
    case NodeKind::Cast: return "cast-expression";
    case NodeKind::SizeofExpr: return "sizeof-expression";
    case NodeKind::Call: return "call-expression";
    case NodeKind::Index: return "index-expression";
    case NodeKind::Member: return "member-expression";
    case NodeKind::Identifier: return "identifier";
    case NodeKind::Literal: return "literal";
    case NodeKind::Paren: return "paren-expression";
    case NodeKind::CompoundLiteral: return "compound-literal";
    case NodeKind::Error: return "error";
  }
  return "unknown";
}

namespace {

constexpr std::size_t kNoTok = static_cast<std::size_t>(-1);

struct ParseFail {};

bool is_type_keyword(std::string_view t) {
  return t == "void" || t == "char" || t == "short" || t == "int" ||
         t == "long" || t == "float" || t == "double" || t == "signed" ||
         t == "unsigned" || t == "_Bool" || t == "_Complex";
}

bool is_qualifier(std::string_view t) {
  return t == "const" || t == "volatile" || t == "restrict" || t == "_Atomic";
}

bool is_storage(std::string_view t) {
  return t == "static" || t == "extern" || t == "auto" || t == "register" ||
         t == "inline" || t == "_Noreturn" || t == "_Thread_local";
}

struct Declarator {
  std::string name;
  std::size_t name_tok = kNoTok;
  int pointer_depth = 0;
  int array_dims = 0;
  bool is_function = false;
  bool identifier_list = false;  // K&R style (a, b, c)
  bool had_error = false;
  bool is_variadic = false;
  std::vector<SyntaxNode> params;
};

struct DeclSpecs {
  std::string base_text;
  std::string storage;
  bool is_typedef = false;
  bool saw_type = false;
  bool has_tag_def = false;  // inline struct/union/enum definition
  std::optional<SyntaxNode> tag_def;
};

class Parser {
 public:
  Parser(std::string file, std::string_view src)
      : file_(std::move(file)), src_(src), toks_(tokenize(src)) {}

  SyntaxNode parse_translation_unit() {
    SyntaxNode tu;
    tu.kind = NodeKind::TranslationUnit;
    std::size_t begin = pos_;
    while (!at_end()) {
      std::size_t before = pos_;
      parse_external_declaration(tu.children);
      if (pos_ == before) {
        // ensure progress on anything unexpected
        recover_one_token(tu.children);
      }
    }
    finish_node(tu, begin);
    if (tu.children.empty()) {
      tu.span = whole_file_span();
      tu.text = std::string(src_);
    }
    return tu;
  }

  ParseDiagnostics collect_diagnostics(const SyntaxNode& root) {
    ParseDiagnostics d;
    d.file = file_;
    walk(root, [&](const SyntaxNode& n) {
      if (n.kind == NodeKind::Error) {
        d.error_regions.push_back(n.span);
        return false;  // nested errors are covered by this region
      }
      return true;
    });
    bool any_substance = false;
    for (const auto& c : root.children) {
      if (c.kind != NodeKind::Error && c.kind != NodeKind::Preproc)
        any_substance = true;
    }
    d.parse_succeeded = any_substance || d.error_regions.empty();
    d.notes = notes_;
    return d;
  }

  std::optional<SyntaxNode> parse_single_expression() {
    try {
      SyntaxNode e = parse_expr();
      if (!at_end()) return std::nullopt;
      return e;
    } catch (ParseFail&) {
      return std::nullopt;
    }
  }

 private:
  std::string file_;
  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::set<std::string, std::less<>> typedef_names_;
  std::vector<std::string> notes_;

  // ---- token plumbing ----------------------------------------------------

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at_end() const { return cur().kind == TokenKind::End; }
  void bump() {
    if (!at_end()) ++pos_;
  }
  bool at_punct(std::string_view p) const { return cur().is_punct(p); }
  bool at_keyword(std::string_view k) const { return cur().is_keyword(k); }
  bool accept_punct(std::string_view p) {
    if (at_punct(p)) {
      bump();
      return true;
    }
    return false;
  }
  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) throw ParseFail{};
  }

  SourceSpan token_span(std::size_t i) const {
    const Token& t = toks_[std::min(i, toks_.size() - 1)];
    SourceSpan s;
    s.file = file_;
    s.start_line = t.line;
    s.start_col = t.col;
    s.end_line = t.end_line;
    s.end_col = t.end_col;
    s.byte_begin = t.offset;
    s.byte_end = t.end_offset();
    return s;
  }

  SourceSpan whole_file_span() const {
    SourceSpan s;
    s.file = file_;
    s.byte_end = src_.size();
    const Token& last = toks_.back();
    s.end_line = last.end_line;
    s.end_col = last.end_col;
    return s;
  }

  // Span covering tokens [begin_tok, end_tok).
  SourceSpan span_between(std::size_t begin_tok, std::size_t end_tok) const {
    if (end_tok <= begin_tok) {
      SourceSpan s = token_span(begin_tok);
      s.byte_end = s.byte_begin;
      s.end_line = s.start_line;
      s.end_col = s.start_col;
      return s;
    }
    const Token& a = toks_[std::min(begin_tok, toks_.size() - 1)];
    const Token& b = toks_[std::min(end_tok - 1, toks_.size() - 1)];
    SourceSpan s;
    s.file = file_;
    s.start_line = a.line;
    s.start_col = a.col;
    s.end_line = b.end_line;
    s.end_col = b.end_col;
    s.byte_begin = a.offset;
    s.byte_end = b.end_offset();
    return s;
  }

  void finish_node(SyntaxNode& n, std::size_t begin_tok) const {
    n.span = span_between(begin_tok, pos_);
    n.text = std::string(src_.substr(n.span.byte_begin,
                                     n.span.byte_end - n.span.byte_begin));
  }

  SyntaxNode make_error(std::size_t begin_tok, std::size_t end_tok) const {
    SyntaxNode e;
    e.kind = NodeKind::Error;
    e.span = span_between(begin_tok, end_tok);
    e.text = std::string(
        src_.substr(e.span.byte_begin, e.span.byte_end - e.span.byte_begin));
    return e;
  }

  void recover_one_token(std::vector<SyntaxNode>& out) {
    std::size_t begin = pos_;
    bump();
    out.push_back(make_error(begin, pos_));
  }

  // Skips to the next ';' at brace/paren depth zero (consuming it) or stops
  // before a '}' that would close the surrounding scope. Emits an Error node
  // covering everything skipped.
  void recover_statement(std::vector<SyntaxNode>& out, std::size_t begin_tok) {
    pos_ = std::max(pos_, begin_tok);
    int depth = 0;
    while (!at_end()) {
      if (at_punct("{") || at_punct("(") || at_punct("[")) {
        ++depth;
        bump();
      } else if (at_punct(")") || at_punct("]")) {
        if (depth == 0) break;
        --depth;
        bump();
      } else if (at_punct("}")) {
        if (depth == 0) break;
        --depth;
        bump();
      } else if (at_punct(";") && depth == 0) {
        bump();
        break;
      } else {
        bump();
      }
    }
    if (pos_ > begin_tok) out.push_back(make_error(begin_tok, pos_));
  }

  SyntaxNode preproc_node() {
    std::size_t begin = pos_;
    SyntaxNode n;
    n.kind = NodeKind::Preproc;
    std::string_view text = cur().text;
    std::size_t i = 1;
    while (i < text.size() && std::isspace((unsigned char)text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && std::isalpha((unsigned char)text[j])) ++j;
    n.aux = std::string(text.substr(i, j - i));  // "include", "if", ...
    bump();
    finish_node(n, begin);
    return n;
  }

  // Directives inside struct bodies and initializer lists make the element
  // layout undecidable without evaluating conditions, so they surface as
  // Error nodes there (the surrounding siblings still parse).
  SyntaxNode preproc_as_error() {
    std::size_t begin = pos_;
    bump();
    return make_error(begin, pos_);
  }

  // ---- declaration specifiers --------------------------------------------

  bool starts_decl_specs() const {
    const Token& t = cur();
    if (t.kind == TokenKind::Keyword) {
      return is_type_keyword(t.text) || is_qualifier(t.text) ||
             is_storage(t.text) || t.text == "struct" || t.text == "union" ||
             t.text == "enum" || t.text == "typedef";
    }
    return false;
  }

  void skip_attributes() {
    while (cur().kind == TokenKind::Identifier &&
           (cur().text == "__attribute__" || cur().text == "__asm__" ||
            cur().text == "__asm" || cur().text == "__extension__" ||
            cur().text == "__restrict" || cur().text == "__restrict__" ||
            cur().text == "__inline" || cur().text == "__inline__" ||
            cur().text == "__forceinline")) {
      bump();
      if (at_punct("(")) skip_balanced_parens();
    }
  }

  void skip_balanced_parens() {
    int depth = 0;
    do {
      if (at_punct("(")) ++depth;
      if (at_punct(")")) --depth;
      bump();
    } while (!at_end() && depth > 0);
  }

  DeclSpecs parse_decl_specs() {
    DeclSpecs specs;
    bool progress = true;
    while (progress && !at_end()) {
      progress = false;
      skip_attributes();
      const Token& t = cur();
      if (t.kind == TokenKind::Keyword) {
        std::string_view w = t.text;
        if (w == "typedef") {
          specs.is_typedef = true;
          bump();
          progress = true;
        } else if (is_storage(w)) {
          if (specs.storage.empty()) specs.storage = std::string(w);
          bump();
          progress = true;
        } else if (is_qualifier(w)) {
          bump();
          progress = true;
        } else if (is_type_keyword(w)) {
          if (!specs.base_text.empty()) specs.base_text += ' ';
          specs.base_text += std::string(w);
          specs.saw_type = true;
          bump();
          progress = true;
        } else if (w == "struct" || w == "union") {
          parse_struct_or_union(specs);
          progress = true;
        } else if (w == "enum") {
          parse_enum(specs);
          progress = true;
        }
      } else if (t.kind == TokenKind::Identifier && !specs.saw_type) {
        // A single identifier can serve as the type (typedef name).
        specs.base_text = std::string(t.text);
        specs.saw_type = true;
        bump();
        progress = true;
      }
    }
    return specs;
  }

  void parse_struct_or_union(DeclSpecs& specs) {
    std::size_t begin = pos_;
    std::string kw(cur().text);
    bump();
    skip_attributes();
    std::string tag;
    if (cur().kind == TokenKind::Identifier) {
      tag = std::string(cur().text);
      bump();
    }
    specs.base_text = kw + (tag.empty() ? "" : " " + tag);
    specs.saw_type = true;
    if (at_punct("{")) {
      SyntaxNode def;
      def.kind = NodeKind::StructDef;
      def.name = tag;
      def.aux = kw;
      bump();  // {
      parse_struct_body(def);
      finish_node(def, begin);
      specs.tag_def = std::move(def);
      specs.has_tag_def = true;
    }
  }

  void parse_struct_body(SyntaxNode& def) {
    while (!at_end() && !at_punct("}")) {
      if (cur().kind == TokenKind::Preproc) {
        def.children.push_back(preproc_as_error());
        continue;
      }
      if (accept_punct(";")) continue;
      std::size_t begin = pos_;
      try {
        parse_field_declaration(def.children);
      } catch (ParseFail&) {
        recover_statement(def.children, begin);
      }
    }
    accept_punct("}");
    skip_attributes();
  }

  void parse_field_declaration(std::vector<SyntaxNode>& out) {
    std::size_t begin = pos_;
    DeclSpecs specs = parse_decl_specs();
    if (!specs.saw_type) throw ParseFail{};
    if (specs.has_tag_def && (at_punct(";") || at_punct("}"))) {
      // anonymous nested struct/union member
      out.push_back(std::move(*specs.tag_def));
      accept_punct(";");
      return;
    }
    if (specs.has_tag_def) out.push_back(*specs.tag_def);
    bool first = true;
    while (true) {
      std::size_t dbegin = first ? begin : pos_;
      Declarator d = parse_declarator(/*allow_abstract=*/false);
      if (at_punct(":")) {  // bit-field width
        bump();
        parse_conditional();
      }
      SyntaxNode field;
      field.kind = NodeKind::Declaration;
      field.name = d.name;
      field.aux = "field";
      field.type = type_syntax(specs, d);
      finish_node(field, dbegin);
      out.push_back(std::move(field));
      first = false;
      if (accept_punct(",")) continue;
      expect_punct(";");
      break;
    }
  }

  void parse_enum(DeclSpecs& specs) {
    bump();  // enum
    skip_attributes();
    std::string tag;
    if (cur().kind == TokenKind::Identifier) {
      tag = std::string(cur().text);
      bump();
    }
    specs.base_text = "int";  // enums behave as ints for matching purposes
    specs.saw_type = true;
    if (at_punct("{")) {
      std::size_t begin = pos_ - 1;
      SyntaxNode def;
      def.kind = NodeKind::EnumDef;
      def.name = tag;
      bump();
      while (!at_end() && !at_punct("}")) {
        if (cur().kind == TokenKind::Preproc) {
          def.children.push_back(preproc_as_error());
          continue;
        }
        if (cur().kind == TokenKind::Identifier) {
          SyntaxNode e;
          e.kind = NodeKind::Declaration;
          e.aux = "enumerator";
          e.name = std::string(cur().text);
          std::size_t ebegin = pos_;
          bump();
          if (accept_punct("=")) parse_conditional();
          finish_node(e, ebegin);
          def.children.push_back(std::move(e));
        }
        if (!accept_punct(",")) {
          if (!at_punct("}")) bump();
        }
      }
      accept_punct("}");
      finish_node(def, begin);
      specs.tag_def = std::move(def);
      specs.has_tag_def = true;
    }
  }

  // ---- declarators ---------------------------------------------------------

  Declarator parse_declarator(bool allow_abstract) {
    Declarator d;
    skip_attributes();
    while (at_punct("*")) {
      ++d.pointer_depth;
      bump();
      while (cur().kind == TokenKind::Keyword && is_qualifier(cur().text))
        bump();
      skip_attributes();
    }
    if (cur().kind == TokenKind::Identifier) {
      d.name = std::string(cur().text);
      d.name_tok = pos_;
      bump();
    } else if (at_punct("(") && looks_like_nested_declarator()) {
      bump();  // (
      Declarator inner = parse_declarator(allow_abstract);
      expect_punct(")");
      d.name = inner.name;
      d.name_tok = inner.name_tok;
      d.pointer_depth += inner.pointer_depth;
      d.array_dims += inner.array_dims;
      // inner function declarators (rare) keep their flag
      d.is_function = inner.is_function;
    } else if (!allow_abstract) {
      throw ParseFail{};
    }
    // postfix: parameter lists and array dimensions
    while (true) {
      skip_attributes();
      if (at_punct("(") && !d.is_function) {
        bump();
        parse_parameter_list(d);
        continue;
      }
      if (at_punct("[")) {
        bump();
        int depth = 1;
        while (!at_end() && depth > 0) {
          if (at_punct("[")) ++depth;
          if (at_punct("]")) --depth;
          bump();
        }
        ++d.array_dims;
        continue;
      }
      break;
    }
    skip_attributes();
    return d;
  }

  bool looks_like_nested_declarator() const {
    // '(' begins a nested declarator when followed by '*', '^' or an
    // identifier that is itself followed by declarator punctuation.
    const Token& n = peek(1);
    if (n.is_punct("*")) return true;
    if (n.kind == TokenKind::Identifier) {
      const Token& nn = peek(2);
      return nn.is_punct(")") || nn.is_punct("[") || nn.is_punct("(");
    }
    return false;
  }

  void parse_parameter_list(Declarator& d) {
    d.is_function = true;
    if (accept_punct(")")) return;
    if (at_keyword("void") && peek(1).is_punct(")")) {
      bump();
      bump();
      return;
    }
    // K&R identifier list: all bare identifiers that are not typedef names.
    if (cur().kind == TokenKind::Identifier &&
        !typedef_names_.count(cur().text) &&
        (peek(1).is_punct(",") || peek(1).is_punct(")"))) {
      bool knr = true;
      for (std::size_t i = 0;; i += 2) {
        const Token& id = peek(i);
        const Token& sep = peek(i + 1);
        if (id.kind != TokenKind::Identifier || typedef_names_.count(id.text)) {
          knr = false;
          break;
        }
        if (sep.is_punct(")")) break;
        if (!sep.is_punct(",")) {
          knr = false;
          break;
        }
      }
      if (knr) {
        d.identifier_list = true;
        while (!at_punct(")") && !at_end()) {
          if (cur().kind == TokenKind::Identifier) {
            SyntaxNode p;
            p.kind = NodeKind::Parameter;
            p.name = std::string(cur().text);
            std::size_t pbegin = pos_;
            bump();
            finish_node(p, pbegin);
            TypeSyntax ts;
            ts.unknown = true;
            p.type = ts;
            d.params.push_back(std::move(p));
          }
          if (!accept_punct(",")) break;
        }
        expect_punct(")");
        return;
      }
    }
    while (true) {
      if (at_punct("...")) {
        d.is_variadic = true;
        bump();
        break;
      }
      std::size_t pbegin = pos_;
      try {
        DeclSpecs specs = parse_decl_specs();
        if (!specs.saw_type) throw ParseFail{};
        Declarator pd = parse_declarator(/*allow_abstract=*/true);
        SyntaxNode p;
        p.kind = NodeKind::Parameter;
        p.name = pd.name;
        p.type = type_syntax(specs, pd);
        finish_node(p, pbegin);
        d.params.push_back(std::move(p));
      } catch (ParseFail&) {
        // skip to ',' or ')' at depth 0; parameter becomes unknown-typed
        int depth = 0;
        pos_ = std::max(pos_, pbegin);
        while (!at_end()) {
          if (at_punct("(") || at_punct("[")) ++depth;
          if (at_punct(")") || at_punct("]")) {
            if (depth == 0) break;
            --depth;
          }
          if (at_punct(",") && depth == 0) break;
          bump();
        }
        SyntaxNode p = make_error(pbegin, pos_);
        SyntaxNode param;
        param.kind = NodeKind::Parameter;
        param.span = p.span;
        param.text = p.text;
        TypeSyntax ts;
        ts.unknown = true;
        param.type = ts;
        param.children.push_back(std::move(p));
        d.params.push_back(std::move(param));
        d.had_error = true;
      }
      if (accept_punct(",")) continue;
      expect_punct(")");
      break;
    }
  }

  static TypeSyntax type_syntax(const DeclSpecs& specs, const Declarator& d) {
    TypeSyntax ts;
    ts.base_text = specs.base_text;
    ts.pointer_depth = d.pointer_depth + d.array_dims;
    ts.is_function = d.is_function;
    ts.unknown = !specs.saw_type || d.had_error;
    return ts;
  }

  // ---- external declarations ----------------------------------------------

  void parse_external_declaration(std::vector<SyntaxNode>& out) {
    if (cur().kind == TokenKind::Preproc) {
      out.push_back(preproc_node());
      return;
    }
    if (accept_punct(";")) return;
    if (at_punct("}")) {  // stray closing brace
      recover_one_token(out);
      return;
    }
    std::size_t begin = pos_;
    try {
      DeclSpecs specs = parse_decl_specs();
      if (!specs.saw_type && !specs.is_typedef) throw ParseFail{};

      if (specs.is_typedef) {
        parse_typedef_declarators(out, specs, begin);
        return;
      }
      // bare "struct X {...};" or "enum E {...};"
      if (specs.has_tag_def && at_punct(";")) {
        bump();
        out.push_back(std::move(*specs.tag_def));
        return;
      }
      if (specs.has_tag_def) out.push_back(*specs.tag_def);

      parse_init_declarators(out, specs, begin, /*top_level=*/true);
    } catch (ParseFail&) {
      recover_statement(out, begin);
    }
  }

  void parse_typedef_declarators(std::vector<SyntaxNode>& out, DeclSpecs& specs,
                                 std::size_t begin) {
    bool first = true;
    while (true) {
      std::size_t dbegin = first ? begin : pos_;
      Declarator d = parse_declarator(/*allow_abstract=*/false);
      SyntaxNode td;
      td.kind = NodeKind::Typedef;
      td.name = d.name;
      td.type = type_syntax(specs, d);
      if (first && specs.has_tag_def) {
        td.children.push_back(*specs.tag_def);
        specs.has_tag_def = false;  // attach the body to the first alias only
      }
      if (!d.name.empty()) typedef_names_.insert(d.name);
      bool done = !accept_punct(",");
      if (done && !accept_punct(";")) {
        // trailing garbage (macro residue): absorb to ';'
        std::vector<SyntaxNode> err;
        recover_statement(err, pos_);
        for (auto& e : err) td.children.push_back(std::move(e));
        if (td.type) td.type->unknown = true;
      }
      finish_node(td, dbegin);
      out.push_back(std::move(td));
      first = false;
      if (done) break;
    }
  }

  // Parses declarators plus initializers; promotes to a function definition
  // when a body follows. Handles K&R parameter declarations and macro debris
  // between the declarator and the body.
  void parse_init_declarators(std::vector<SyntaxNode>& out, DeclSpecs& specs,
                              std::size_t begin, bool top_level) {
    bool first = true;
    while (true) {
      std::size_t dbegin = first ? begin : pos_;
      Declarator d = parse_declarator(/*allow_abstract=*/false);

      if (top_level && d.is_function) {
        std::vector<SyntaxNode> header_extra;
        bool header_error = d.had_error;

        // K&R parameter declarations before the body.
        if (d.identifier_list) {
          while (starts_decl_specs() && !at_keyword("typedef")) {
            std::size_t kbegin = pos_;
            try {
              DeclSpecs ks = parse_decl_specs();
              if (!ks.saw_type) throw ParseFail{};
              parse_init_declarators(header_extra, ks, kbegin,
                                     /*top_level=*/false);
            } catch (ParseFail&) {
              recover_statement(header_extra, kbegin);
              header_error = true;
            }
          }
        }

        // Macro residue between declarator and body, e.g. FUNC_NOAPI(FAIL).
        if (!at_punct("{") && !at_punct(";") && !at_punct(",") &&
            !at_punct("=") && brace_before_semicolon()) {
          std::size_t gbegin = pos_;
          while (!at_end() && !at_punct("{")) {
            if (at_punct("(")) {
              skip_balanced_parens();
            } else {
              bump();
            }
          }
          header_extra.push_back(make_error(gbegin, pos_));
          header_error = true;
        }

        if (at_punct("{")) {
          SyntaxNode fn;
          fn.kind = NodeKind::FunctionDef;
          fn.name = d.name;
          fn.aux = specs.storage;
          TypeSyntax ret = type_syntax(specs, d);
          ret.is_function = false;  // record the return type, not the decl
          if (header_error || d.identifier_list) {
            for (auto& p : d.params) {
              if (p.type) p.type->unknown = true;
            }
          }
          fn.type = ret;
          for (auto& p : d.params) fn.children.push_back(std::move(p));
          for (auto& e : header_extra) fn.children.push_back(std::move(e));
          fn.children.push_back(parse_block());
          finish_node(fn, dbegin);
          out.push_back(std::move(fn));
          return;  // a definition ends the declarator list
        }
        for (auto& e : header_extra) out.push_back(std::move(e));
      }

      SyntaxNode decl;
      decl.kind = d.is_function ? NodeKind::FunctionDecl : NodeKind::Declaration;
      decl.name = d.name;
      decl.aux = specs.storage;
      decl.type = type_syntax(specs, d);
      if (d.is_function) {
        for (auto& p : d.params) decl.children.push_back(std::move(p));
      }
      if (accept_punct("=")) {
        decl.children.push_back(parse_initializer());
      }
      bool more = accept_punct(",");
      if (!more && !accept_punct(";")) {
        if (cur().kind == TokenKind::Identifier || at_punct("(")) {
          // trailing macro token(s): absorb to ';' and mark the type unknown
          std::vector<SyntaxNode> err;
          recover_statement(err, pos_);
          for (auto& e : err) decl.children.push_back(std::move(e));
          if (decl.type) decl.type->unknown = true;
        } else {
          throw ParseFail{};
        }
      }
      finish_node(decl, dbegin);
      out.push_back(std::move(decl));
      first = false;
      if (!more) break;
    }
  }

  // Is there a '{' before the next ';' at depth zero? Used to decide whether
  // unexpected tokens after a function declarator precede a real body.
  bool brace_before_semicolon() const {
    int depth = 0;
    for (std::size_t i = pos_; i < toks_.size(); ++i) {
      const Token& t = toks_[i];
      if (t.kind == TokenKind::End) return false;
      if (t.is_punct("(") || t.is_punct("[")) ++depth;
      else if (t.is_punct(")") || t.is_punct("]")) --depth;
      else if (t.is_punct("{") && depth <= 0) return true;
      else if (t.is_punct(";") && depth <= 0) return false;
      else if (t.is_punct("}") && depth <= 0) return false;
      if (i - pos_ > 512) return false;  // give up on runaway headers
    }
    return false;
  }

  // ---- statements -----------------------------------------------------------

  SyntaxNode parse_block() {
    std::size_t begin = pos_;
    SyntaxNode block;
    block.kind = NodeKind::Block;
    expect_punct("{");
    while (!at_end() && !at_punct("}")) {
      std::size_t before = pos_;
      try {
        parse_statement(block.children);
      } catch (ParseFail&) {
        recover_statement(block.children, before);
      }
      if (pos_ == before) recover_one_token(block.children);
    }
    accept_punct("}");
    finish_node(block, begin);
    return block;
  }

  bool looks_like_local_declaration() const {
    if (starts_decl_specs()) return true;
    if (cur().kind != TokenKind::Identifier) return false;
    if (typedef_names_.count(cur().text)) return true;
    std::size_t i = 1;
    while (peek(i).is_punct("*")) ++i;
    if (i > 1 && peek(i).kind == TokenKind::Identifier) return true;  // T * x
    if (i == 1 && peek(1).kind == TokenKind::Identifier) {
      // "T x" — but not "T (" (call) or "T:" (label)
      return true;
    }
    return false;
  }

  void parse_statement(std::vector<SyntaxNode>& out) {
    if (cur().kind == TokenKind::Preproc) {
      out.push_back(preproc_node());
      return;
    }
    if (at_punct("{")) {
      out.push_back(parse_block());
      return;
    }
    if (accept_punct(";")) return;

    const Token& t = cur();
    if (t.kind == TokenKind::Keyword) {
      std::string_view kw = t.text;
      if (kw == "if") return parse_if(out);
      if (kw == "while") return parse_while(out);
      if (kw == "do") return parse_do(out);
      if (kw == "for") return parse_for(out);
      if (kw == "switch") return parse_switch(out);
      if (kw == "return") return parse_return(out);
      if (kw == "break" || kw == "continue") {
        std::size_t begin = pos_;
        SyntaxNode s;
        s.kind = NodeKind::Statement;
        s.aux = std::string(kw);
        bump();
        accept_punct(";");
        finish_node(s, begin);
        out.push_back(std::move(s));
        return;
      }
      if (kw == "goto") {
        std::size_t begin = pos_;
        SyntaxNode s;
        s.kind = NodeKind::Statement;
        s.aux = "goto";
        bump();
        if (cur().kind == TokenKind::Identifier) {
          s.name = std::string(cur().text);
          bump();
        }
        expect_punct(";");
        finish_node(s, begin);
        out.push_back(std::move(s));
        return;
      }
      if (kw == "case" || kw == "default") {
        std::size_t begin = pos_;
        SyntaxNode s;
        s.kind = NodeKind::Statement;
        s.aux = std::string(kw);
        bump();
        if (kw == "case") s.children.push_back(parse_conditional());
        expect_punct(":");
        finish_node(s, begin);
        out.push_back(std::move(s));
        return;
      }
    }

    // label:
    if (t.kind == TokenKind::Identifier && peek(1).is_punct(":") &&
        !peek(2).is_punct(":")) {
      std::size_t begin = pos_;
      SyntaxNode s;
      s.kind = NodeKind::Statement;
      s.aux = "label";
      s.name = std::string(t.text);
      bump();
      bump();
      finish_node(s, begin);
      out.push_back(std::move(s));
      return;
    }

    if (looks_like_local_declaration()) {
      std::size_t begin = pos_;
      DeclSpecs specs = parse_decl_specs();
      if (specs.has_tag_def && at_punct(";")) {
        bump();
        out.push_back(std::move(*specs.tag_def));
        return;
      }
      if (specs.has_tag_def) out.push_back(*specs.tag_def);
      parse_init_declarators(out, specs, begin, /*top_level=*/false);
      return;
    }

    // expression statement
    std::size_t begin = pos_;
    SyntaxNode expr = parse_expr();
    SyntaxNode s;
    s.kind = NodeKind::ExprStatement;
    s.children.push_back(std::move(expr));
    expect_punct(";");
    finish_node(s, begin);
    out.push_back(std::move(s));
  }

  void parse_if(std::vector<SyntaxNode>& out) {
    std::size_t begin = pos_;
    SyntaxNode s;
    s.kind = NodeKind::Statement;
    s.aux = "if";
    bump();
    expect_punct("(");
    s.children.push_back(parse_expr());
    expect_punct(")");
    parse_substatement(s.children);
    if (at_keyword("else")) {
      bump();
      parse_substatement(s.children);
    }
    finish_node(s, begin);
    out.push_back(std::move(s));
  }

  void parse_while(std::vector<SyntaxNode>& out) {
    std::size_t begin = pos_;
    SyntaxNode s;
    s.kind = NodeKind::Statement;
    s.aux = "while";
    bump();
    expect_punct("(");
    s.children.push_back(parse_expr());
    expect_punct(")");
    parse_substatement(s.children);
    finish_node(s, begin);
    out.push_back(std::move(s));
  }

  void parse_do(std::vector<SyntaxNode>& out) {
    std::size_t begin = pos_;
    SyntaxNode s;
    s.kind = NodeKind::Statement;
    s.aux = "do";
    bump();
    parse_substatement(s.children);
    if (at_keyword("while")) {
      bump();
      expect_punct("(");
      s.children.push_back(parse_expr());
      expect_punct(")");
      accept_punct(";");
    }
    finish_node(s, begin);
    out.push_back(std::move(s));
  }

  void parse_for(std::vector<SyntaxNode>& out) {
    std::size_t begin = pos_;
    SyntaxNode s;
    s.kind = NodeKind::Statement;
    s.aux = "for";
    bump();
    expect_punct("(");
    if (!at_punct(";")) {
      if (looks_like_local_declaration()) {
        std::size_t dbegin = pos_;
        DeclSpecs specs = parse_decl_specs();
        parse_for_init_declarators(s.children, specs, dbegin);
      } else {
        s.children.push_back(parse_expr());
        expect_punct(";");
      }
    } else {
      bump();
    }
    if (!at_punct(";")) s.children.push_back(parse_expr());
    expect_punct(";");
    if (!at_punct(")")) s.children.push_back(parse_expr());
    expect_punct(")");
    parse_substatement(s.children);
    finish_node(s, begin);
    out.push_back(std::move(s));
  }

  // for-init declarations end at ';' like normal ones; reuse the general path
  void parse_for_init_declarators(std::vector<SyntaxNode>& out,
                                  DeclSpecs& specs, std::size_t begin) {
    parse_init_declarators(out, specs, begin, /*top_level=*/false);
  }

  void parse_switch(std::vector<SyntaxNode>& out) {
    std::size_t begin = pos_;
    SyntaxNode s;
    s.kind = NodeKind::Statement;
    s.aux = "switch";
    bump();
    expect_punct("(");
    s.children.push_back(parse_expr());
    expect_punct(")");
    parse_substatement(s.children);
    finish_node(s, begin);
    out.push_back(std::move(s));
  }

  void parse_return(std::vector<SyntaxNode>& out) {
    std::size_t begin = pos_;
    SyntaxNode s;
    s.kind = NodeKind::Statement;
    s.aux = "return";
    bump();
    if (!at_punct(";")) s.children.push_back(parse_expr());
    expect_punct(";");
    finish_node(s, begin);
    out.push_back(std::move(s));
  }

  void parse_substatement(std::vector<SyntaxNode>& out) {
    std::size_t before = pos_;
    try {
      parse_statement(out);
    } catch (ParseFail&) {
      recover_statement(out, before);
    }
    if (pos_ == before) recover_one_token(out);
  }

  // ---- initializers ---------------------------------------------------------

  SyntaxNode parse_initializer() {
    if (!at_punct("{")) return parse_assignment();
    std::size_t begin = pos_;
    SyntaxNode init;
    init.kind = NodeKind::Initializer;
    bump();  // {
    while (!at_end() && !at_punct("}")) {
      if (cur().kind == TokenKind::Preproc) {
        init.children.push_back(preproc_as_error());
        continue;
      }
      if (accept_punct(",")) continue;
      std::size_t ibegin = pos_;
      try {
        SyntaxNode item;
        item.kind = NodeKind::InitItem;
        // designators: .field = / [index] =
        while (true) {
          if (at_punct(".") && peek(1).kind == TokenKind::Identifier) {
            bump();
            item.name = std::string(cur().text);
            bump();
          } else if (at_punct("[")) {
            bump();
            parse_conditional();
            expect_punct("]");
            item.aux = "[index]";
          } else {
            break;
          }
        }
        if (!item.name.empty() || !item.aux.empty()) expect_punct("=");
        item.children.push_back(parse_initializer());
        finish_node(item, ibegin);
        init.children.push_back(std::move(item));
      } catch (ParseFail&) {
        // sync to ',' or '}' at depth 0
        int depth = 0;
        pos_ = std::max(pos_, ibegin);
        while (!at_end()) {
          if (at_punct("{") || at_punct("(") || at_punct("[")) ++depth;
          if (at_punct("}") || at_punct(")") || at_punct("]")) {
            if (depth == 0) break;
            --depth;
          }
          if (at_punct(",") && depth == 0) break;
          bump();
        }
        if (pos_ > ibegin) init.children.push_back(make_error(ibegin, pos_));
      }
    }
    accept_punct("}");
    finish_node(init, begin);
    return init;
  }

  // ---- expressions ----------------------------------------------------------

  SyntaxNode parse_expr() {
    SyntaxNode e = parse_assignment();
    while (at_punct(",")) {
      std::size_t begin_tok = pos_;
      bump();
      SyntaxNode rhs = parse_assignment();
      SyntaxNode seq;
      seq.kind = NodeKind::Binary;
      seq.aux = ",";
      seq.span = e.span;
      seq.span.end_line = rhs.span.end_line;
      seq.span.end_col = rhs.span.end_col;
      seq.span.byte_end = rhs.span.byte_end;
      seq.text = slice(seq.span);
      seq.children.push_back(std::move(e));
      seq.children.push_back(std::move(rhs));
      e = std::move(seq);
      (void)begin_tok;
    }
    return e;
  }

  std::string slice(const SourceSpan& s) const {
    return std::string(src_.substr(s.byte_begin, s.byte_end - s.byte_begin));
  }

  SyntaxNode join(NodeKind kind, std::string aux, SyntaxNode lhs,
                  SyntaxNode rhs) {
    SyntaxNode n;
    n.kind = kind;
    n.aux = std::move(aux);
    n.span = lhs.span;
    n.span.end_line = rhs.span.end_line;
    n.span.end_col = rhs.span.end_col;
    n.span.byte_end = rhs.span.byte_end;
    n.text = slice(n.span);
    n.children.push_back(std::move(lhs));
    n.children.push_back(std::move(rhs));
    return n;
  }

  SyntaxNode parse_assignment() {
    SyntaxNode lhs = parse_conditional();
    static const std::string_view ops[] = {"=",  "+=", "-=", "*=", "/=", "%=",
                                           "<<=", ">>=", "&=", "^=", "|="};
    for (auto op : ops) {
      if (at_punct(op)) {
        bump();
        SyntaxNode rhs = parse_assignment();
        return join(NodeKind::Assignment, std::string(op), std::move(lhs),
                    std::move(rhs));
      }
    }
    return lhs;
  }

  SyntaxNode parse_conditional() {
    SyntaxNode cond = parse_binary(0);
    if (at_punct("?")) {
      bump();
      SyntaxNode then = parse_expr();
      expect_punct(":");
      SyntaxNode els = parse_conditional();
      SyntaxNode t;
      t.kind = NodeKind::Ternary;
      t.span = cond.span;
      t.span.end_line = els.span.end_line;
      t.span.end_col = els.span.end_col;
      t.span.byte_end = els.span.byte_end;
      t.text = slice(t.span);
      t.children.push_back(std::move(cond));
      t.children.push_back(std::move(then));
      t.children.push_back(std::move(els));
      return t;
    }
    return cond;
  }

  int binary_prec(std::string_view op) const {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=") return 6;
    if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
    if (op == "<<" || op == ">>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    return 0;
  }

  SyntaxNode parse_binary(int min_prec) {
    SyntaxNode lhs = parse_cast_or_unary();
    while (cur().kind == TokenKind::Punct) {
      int prec = binary_prec(cur().text);
      if (prec == 0 || prec < min_prec) break;
      std::string op(cur().text);
      bump();
      SyntaxNode rhs = parse_binary(prec + 1);
      lhs = join(NodeKind::Binary, op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  // Decides whether '(' starts a cast / compound literal. Heuristic: the
  // parenthesized tokens must look like a type and the following token must
  // begin an expression.
  bool looks_like_cast() const {
    if (!at_punct("(")) return false;
    std::size_t i = pos_ + 1;
    const Token& first = toks_[std::min(i, toks_.size() - 1)];
    bool type_start = false;
    if (first.kind == TokenKind::Keyword &&
        (is_type_keyword(first.text) || is_qualifier(first.text) ||
         first.text == "struct" || first.text == "union" ||
         first.text == "enum"))
      type_start = true;
    if (first.kind == TokenKind::Identifier) {
      if (typedef_names_.count(first.text)) type_start = true;
      std::string_view t = first.text;
      if (t.size() > 2 && t.substr(t.size() - 2) == "_t") type_start = true;
      const Token& second = toks_[std::min(i + 1, toks_.size() - 1)];
      if (second.is_punct("*")) type_start = true;
    }
    if (!type_start) return false;
    // scan to the matching ')'
    int depth = 0;
    for (std::size_t j = pos_; j < toks_.size(); ++j) {
      const Token& t = toks_[j];
      if (t.kind == TokenKind::End) return false;
      if (t.is_punct("(")) ++depth;
      if (t.is_punct(")")) {
        --depth;
        if (depth == 0) {
          const Token& next = toks_[std::min(j + 1, toks_.size() - 1)];
          bool expr_follows =
              next.kind == TokenKind::Identifier ||
              next.kind == TokenKind::Number ||
              next.kind == TokenKind::String ||
              next.kind == TokenKind::CharLit || next.is_punct("(") ||
              next.is_punct("{") || next.is_punct("*") || next.is_punct("&") ||
              next.is_punct("!") || next.is_punct("~") || next.is_punct("-") ||
              next.is_punct("+") || next.is_punct("++") ||
              next.is_punct("--") || next.is_keyword("sizeof");
          return expr_follows;
        }
      }
      if (j - pos_ > 64) return false;
    }
    return false;
  }

  SyntaxNode parse_cast_or_unary() {
    if (looks_like_cast()) {
      std::size_t begin = pos_;
      bump();  // (
      std::size_t type_begin = pos_;
      int depth = 1;
      while (!at_end() && depth > 0) {
        if (at_punct("(")) ++depth;
        if (at_punct(")")) --depth;
        if (depth > 0) bump();
      }
      SourceSpan ts = span_between(type_begin, pos_);
      std::string type_text = slice(ts);
      expect_punct(")");
      if (at_punct("{")) {
        SyntaxNode lit;
        lit.kind = NodeKind::CompoundLiteral;
        lit.aux = type_text;
        lit.children.push_back(parse_initializer());
        finish_node(lit, begin);
        return parse_postfix_suffixes(std::move(lit));
      }
      SyntaxNode cast;
      cast.kind = NodeKind::Cast;
      cast.aux = type_text;
      cast.children.push_back(parse_cast_or_unary());
      finish_node(cast, begin);
      return cast;
    }
    return parse_unary();
  }

  SyntaxNode parse_unary() {
    static const std::string_view unary_ops[] = {"++", "--", "+", "-",
                                                 "!",  "~",  "*", "&"};
    for (auto op : unary_ops) {
      if (at_punct(op)) {
        std::size_t begin = pos_;
        bump();
        SyntaxNode operand = parse_cast_or_unary();
        SyntaxNode u;
        u.kind = NodeKind::Unary;
        u.aux = std::string(op);
        u.children.push_back(std::move(operand));
        finish_node(u, begin);
        return u;
      }
    }
    if (at_keyword("sizeof") || at_keyword("_Alignof")) {
      std::size_t begin = pos_;
      SyntaxNode s;
      s.kind = NodeKind::SizeofExpr;
      s.aux = std::string(cur().text);
      bump();
      if (at_punct("(")) {
        // Treat "sizeof(...)" uniformly: capture the parenthesized tokens.
        // Identifiers inside never count as address-taken uses.
        std::size_t inner_begin = pos_ + 1;
        skip_balanced_parens();
        SourceSpan ts = span_between(inner_begin, pos_ - 1);
        s.name = slice(ts);
      } else {
        s.children.push_back(parse_cast_or_unary());
      }
      finish_node(s, begin);
      return s;
    }
    return parse_postfix();
  }

  SyntaxNode parse_postfix() { return parse_postfix_suffixes(parse_primary()); }

  SyntaxNode parse_postfix_suffixes(SyntaxNode base) {
    while (true) {
      if (at_punct("(")) {
        std::size_t begin_call = pos_;
        SyntaxNode call;
        call.kind = NodeKind::Call;
        call.span = base.span;
        call.children.push_back(std::move(base));
        bump();  // (
        bool args_error = false;
        while (!at_end() && !at_punct(")")) {
          std::size_t abegin = pos_;
          try {
            call.children.push_back(parse_assignment());
          } catch (ParseFail&) {
            int depth = 0;
            pos_ = std::max(pos_, abegin);
            while (!at_end()) {
              if (at_punct("(") || at_punct("[") || at_punct("{")) ++depth;
              if (at_punct(")") || at_punct("]") || at_punct("}")) {
                if (depth == 0) break;
                --depth;
              }
              if (at_punct(",") && depth == 0) break;
              bump();
            }
            if (pos_ > abegin)
              call.children.push_back(make_error(abegin, pos_));
            args_error = true;
          }
          if (!accept_punct(",")) break;
        }
        expect_punct(")");
        if (args_error) call.aux = "args-error";
        // span: from callee start to ')'
        std::size_t b = call.children.front().span.byte_begin;
        call.span = span_between(begin_call, pos_);
        call.span.byte_begin = b;
        call.span.start_line = call.children.front().span.start_line;
        call.span.start_col = call.children.front().span.start_col;
        call.text = slice(call.span);
        base = std::move(call);
        continue;
      }
      if (at_punct("[")) {
        bump();
        SyntaxNode idx_expr = parse_expr();
        expect_punct("]");
        SyntaxNode idx = join(NodeKind::Index, "", std::move(base),
                              std::move(idx_expr));
        // extend to cover the ']'
        idx.span.byte_end = toks_[pos_ - 1].end_offset();
        idx.span.end_line = toks_[pos_ - 1].end_line;
        idx.span.end_col = toks_[pos_ - 1].end_col;
        idx.text = slice(idx.span);
        base = std::move(idx);
        continue;
      }
      if (at_punct(".") || at_punct("->")) {
        std::string op(cur().text);
        bump();
        if (cur().kind != TokenKind::Identifier) throw ParseFail{};
        SyntaxNode m;
        m.kind = NodeKind::Member;
        m.aux = op;
        m.name = std::string(cur().text);
        m.span = base.span;
        m.span.end_line = cur().end_line;
        m.span.end_col = cur().end_col;
        m.span.byte_end = cur().end_offset();
        bump();
        m.text = slice(m.span);
        m.children.push_back(std::move(base));
        base = std::move(m);
        continue;
      }
      if (at_punct("++") || at_punct("--")) {
        SyntaxNode p;
        p.kind = NodeKind::Postfix;
        p.aux = std::string(cur().text);
        p.span = base.span;
        p.span.end_line = cur().end_line;
        p.span.end_col = cur().end_col;
        p.span.byte_end = cur().end_offset();
        bump();
        p.text = slice(p.span);
        p.children.push_back(std::move(base));
        base = std::move(p);
        continue;
      }
      break;
    }
    return base;
  }

  SyntaxNode parse_primary() {
    const Token& t = cur();
    std::size_t begin = pos_;
    if (t.kind == TokenKind::Identifier) {
      SyntaxNode id;
      id.kind = NodeKind::Identifier;
      id.name = std::string(t.text);
      bump();
      finish_node(id, begin);
      return id;
    }
    if (t.kind == TokenKind::Number || t.kind == TokenKind::String ||
        t.kind == TokenKind::CharLit) {
      SyntaxNode lit;
      lit.kind = NodeKind::Literal;
      lit.name = std::string(t.text);
      if (t.kind == TokenKind::String) {
        lit.aux = "string";
      } else if (t.kind == TokenKind::CharLit) {
        lit.aux = "char";
      } else {
        lit.aux = (t.text.find('.') != std::string_view::npos ||
                   ((t.text.find('e') != std::string_view::npos ||
                     t.text.find('E') != std::string_view::npos) &&
                    t.text.substr(0, 2) != "0x" && t.text.substr(0, 2) != "0X"))
                      ? "float"
                      : "int";
      }
      bump();
      // adjacent string literal concatenation
      if (t.kind == TokenKind::String) {
        while (cur().kind == TokenKind::String) bump();
      }
      finish_node(lit, begin);
      return lit;
    }
    if (at_punct("(")) {
      bump();
      SyntaxNode inner = parse_expr();
      expect_punct(")");
      SyntaxNode p;
      p.kind = NodeKind::Paren;
      p.children.push_back(std::move(inner));
      finish_node(p, begin);
      return p;
    }
    throw ParseFail{};
  }
};

}  // namespace

SyntaxTree parse_file(const std::string& path, std::string source_text) {
  SyntaxTree tree;
  tree.file = path;
  tree.source = std::move(source_text);
  Parser parser(path, tree.source);
  tree.root = parser.parse_translation_unit();
  tree.diagnostics = parser.collect_diagnostics(tree.root);
  return tree;
}

std::optional<SyntaxNode> parse_expression_text(std::string_view text) {
  std::string owned(text);
  Parser parser("<expr>", owned);
  return parser.parse_single_expression();
}

}  // namespace sea
