#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sqlink::detail {

enum class TokenKind {
    Identifier,   // bare word or quoted identifier ("x", `x`, [x])
    Keyword,      // bare word that matches the SQL keyword set
    Number,
    String,       // 'literal'
    Punct,        // operators and punctuation, one token per symbol run
    End,
};

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;        // canonical (lowercased) for words, raw otherwise
    std::string original;    // as written
    bool quoted = false;     // quoted identifiers never count as keywords
    std::size_t offset = 0;  // byte offset in the input, for error messages
};

bool is_sql_keyword(std::string_view canonical_word);

/// SQL-aware lexer: skips -- and /* */ comments, treats 'strings' as literals,
/// and honors "double-quoted", `backquoted` and [bracketed] identifiers.
/// Total on arbitrary bytes; unterminated constructs consume to end of input.
std::vector<Token> lex_sql(std::string_view sql);

}  // namespace sqlink::detail
