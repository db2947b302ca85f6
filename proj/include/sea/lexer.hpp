#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sea {

enum class TokenKind {
  Identifier,
  Keyword,
  Number,
  String,
  CharLit,
  Punct,
  Preproc,  // whole directive line, continuations folded in
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string_view text;  // view into the source buffer
  std::size_t offset = 0;
  int line = 1;
  int col = 1;  // 1-based byte column
  int end_line = 1;
  int end_col = 1;  // position one past the last byte

  std::size_t end_offset() const { return offset + text.size(); }

  bool is(TokenKind k) const { return kind == k; }
  bool is_punct(std::string_view p) const {
    return kind == TokenKind::Punct && text == p;
  }
  bool is_keyword(std::string_view k) const {
    return kind == TokenKind::Keyword && text == k;
  }
};

bool is_c_keyword(std::string_view word);

// Tokenizes C source without preprocessing. Comments and whitespace are
// skipped; directives become single Preproc tokens. Never fails: odd bytes
// are emitted as single-character Punct tokens.
std::vector<Token> tokenize(std::string_view source);

}  // namespace sea
