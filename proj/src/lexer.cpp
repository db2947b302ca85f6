#include "sea/lexer.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

namespace sea {

bool is_c_keyword(std::string_view word) {
  static const std::unordered_set<std::string_view> kKeywords = {
      "auto",     "break",    "case",     "char",     "const",
      "continue", "default",  "do",       "double",   "else",
      "enum",     "extern",   "float",    "for",      "goto",
      "if",       "inline",   "int",      "long",     "register",
      "restrict", "return",   "short",    "signed",   "sizeof",
      "static",   "struct",   "switch",   "typedef",  "union",
      "unsigned", "void",     "volatile", "while",    "_Alignas",
      "_Alignof", "_Atomic",  "_Bool",    "_Complex", "_Generic",
      "_Noreturn", "_Static_assert", "_Thread_local",
  };
  return kKeywords.count(word) > 0;
}

namespace {

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Multi-character punctuators, longest first.
constexpr std::array<std::string_view, 19> kPuncts3 = {
    "<<=", ">>=", "...", "->*",  // ->* never in C but harmless
    "<<",  ">>",  "<=",  ">=",  "==", "!=", "&&", "||", "++",
    "--",  "->",  "+=",  "-=",  "*=", "/=",
};
constexpr std::array<std::string_view, 5> kPuncts2b = {"%=", "&=", "^=", "|=",
                                                       "##"};

class Cursor {
 public:
  explicit Cursor(std::string_view src) : src_(src) {}

  bool eof() const { return pos_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  std::size_t pos() const { return pos_; }
  int line() const { return line_; }
  int col() const { return col_; }

  void advance() {
    if (eof()) return;
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void advance_n(std::size_t n) {
    while (n-- > 0) advance();
  }

  bool at_line_start() const { return line_start_; }
  void set_line_start(bool v) { line_start_ = v; }

  std::string_view slice(std::size_t begin) const {
    return src_.substr(begin, pos_ - begin);
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  bool line_start_ = true;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) {
  std::vector<Token> tokens;
  Cursor cur(source);
  bool line_start = true;  // only whitespace seen so far on this line

  auto push = [&](TokenKind kind, std::size_t begin, int line, int col) {
    Token t;
    t.kind = kind;
    t.text = source.substr(begin, cur.pos() - begin);
    t.offset = begin;
    t.line = line;
    t.col = col;
    t.end_line = cur.line();
    t.end_col = cur.col();
    tokens.push_back(t);
  };

  while (!cur.eof()) {
    char c = cur.peek();

    // Whitespace and line splices.
    if (c == '\n') {
      line_start = true;
      cur.advance();
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      cur.advance();
      continue;
    }
    if (c == '\\' && (cur.peek(1) == '\n' ||
                      (cur.peek(1) == '\r' && cur.peek(2) == '\n'))) {
      cur.advance();
      cur.advance();
      if (cur.peek() == '\n') cur.advance();
      continue;
    }

    // Comments.
    if (c == '/' && cur.peek(1) == '/') {
      while (!cur.eof() && cur.peek() != '\n') cur.advance();
      continue;
    }
    if (c == '/' && cur.peek(1) == '*') {
      cur.advance_n(2);
      while (!cur.eof() && !(cur.peek() == '*' && cur.peek(1) == '/'))
        cur.advance();
      cur.advance_n(2);
      continue;
    }

    std::size_t begin = cur.pos();
    int line = cur.line(), col = cur.col();

    // Preprocessor directive: '#' as first non-whitespace of a line.
    // Consume to end of line, folding backslash continuations.
    if (c == '#' && line_start) {
      while (!cur.eof()) {
        if (cur.peek() == '\\' &&
            (cur.peek(1) == '\n' ||
             (cur.peek(1) == '\r' && cur.peek(2) == '\n'))) {
          cur.advance_n(cur.peek(1) == '\r' ? 3 : 2);
          continue;
        }
        if (cur.peek() == '\n') break;
        // comments may hide newlines inside directives
        if (cur.peek() == '/' && cur.peek(1) == '*') {
          cur.advance_n(2);
          while (!cur.eof() && !(cur.peek() == '*' && cur.peek(1) == '/'))
            cur.advance();
          cur.advance_n(2);
          continue;
        }
        if (cur.peek() == '/' && cur.peek(1) == '/') break;
        cur.advance();
      }
      push(TokenKind::Preproc, begin, line, col);
      line_start = false;
      continue;
    }
    line_start = false;

    if (ident_start(c)) {
      while (!cur.eof() && ident_char(cur.peek())) cur.advance();
      auto text = cur.slice(begin);
      push(is_c_keyword(text) ? TokenKind::Keyword : TokenKind::Identifier,
           begin, line, col);
      continue;
    }

    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(cur.peek(1))))) {
      // pp-number: digits, dots, ident chars, exponent signs
      while (!cur.eof()) {
        char n = cur.peek();
        if (ident_char(n) || n == '.') {
          char prev = cur.peek();
          cur.advance();
          if ((prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P') &&
              (cur.peek() == '+' || cur.peek() == '-'))
            cur.advance();
        } else {
          break;
        }
      }
      push(TokenKind::Number, begin, line, col);
      continue;
    }

    if (c == '"' || c == '\'') {
      char quote = c;
      cur.advance();
      while (!cur.eof() && cur.peek() != quote) {
        if (cur.peek() == '\\') cur.advance();
        if (!cur.eof()) cur.advance();
      }
      if (!cur.eof()) cur.advance();  // closing quote; tolerate EOF
      push(quote == '"' ? TokenKind::String : TokenKind::CharLit, begin, line,
           col);
      continue;
    }

    // Punctuators, longest match first.
    bool matched = false;
    auto rest = source.substr(cur.pos());
    for (auto p : kPuncts3) {
      if (rest.substr(0, p.size()) == p) {
        cur.advance_n(p.size());
        push(TokenKind::Punct, begin, line, col);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    for (auto p : kPuncts2b) {
      if (rest.substr(0, p.size()) == p) {
        cur.advance_n(p.size());
        push(TokenKind::Punct, begin, line, col);
        matched = true;
        break;
      }
    }
    if (matched) continue;

    cur.advance();
    push(TokenKind::Punct, begin, line, col);
  }

  Token end;
  end.kind = TokenKind::End;
  end.offset = source.size();
  end.line = cur.line();
  end.col = cur.col();
  end.end_line = end.line;
  end.end_col = end.col;
  tokens.push_back(end);
  return tokens;
}

}  // namespace sea
