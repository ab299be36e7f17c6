#include "sql_lexer.hpp"

#include <cctype>
#include <unordered_set>

namespace sqlink::detail {

namespace {

bool is_word_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

const std::unordered_set<std::string>& keyword_set() {
    static const std::unordered_set<std::string> kw = {
        "select",  "from",      "where",   "group",     "by",        "having",   "order",
        "limit",   "offset",    "join",    "left",      "right",     "full",     "inner",
        "outer",   "cross",     "natural", "on",        "using",     "as",       "and",
        "or",      "not",       "in",      "exists",    "between",   "like",     "glob",
        "regexp",  "match",     "is",      "null",      "case",      "when",     "then",
        "else",    "end",       "cast",    "distinct",  "all",       "union",    "intersect",
        "except",  "with",      "recursive", "values",  "asc",       "desc",     "collate",
        "escape",  "isnull",    "notnull", "true",      "false",     "over",     "partition",
        "filter",  "window",    "rows",    "range",     "unbounded", "preceding", "following",
        "current", "row",       "insert",  "into",      "update",    "set",      "delete",
        "create",  "table",     "drop",    "alter",     "index",     "view",     "pragma",
        "attach",  "detach",    "if",      "nulls",     "first",     "last",
    };
    return kw;
}

}  // namespace

bool is_sql_keyword(std::string_view canonical_word) {
    return keyword_set().count(std::string(canonical_word)) > 0;
}

std::vector<Token> lex_sql(std::string_view sql) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    const std::size_t n = sql.size();

    auto push = [&](TokenKind kind, std::string text, std::string original, bool quoted, std::size_t offset) {
        tokens.push_back({kind, std::move(text), std::move(original), quoted, offset});
    };

    while (i < n) {
        char c = sql[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        // comments
        if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
            while (i < n && sql[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
            i += 2;
            while (i + 1 < n && !(sql[i] == '*' && sql[i + 1] == '/')) ++i;
            i = (i + 1 < n) ? i + 2 : n;
            continue;
        }
        // string literal, '' escapes a quote
        if (c == '\'') {
            std::size_t start = i++;
            std::string value;
            while (i < n) {
                if (sql[i] == '\'') {
                    if (i + 1 < n && sql[i + 1] == '\'') {
                        value.push_back('\'');
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                value.push_back(sql[i++]);
            }
            push(TokenKind::String, value, std::string(sql.substr(start, i - start)), false, start);
            continue;
        }
        // quoted identifiers
        if (c == '"' || c == '`' || c == '[') {
            char close = (c == '[') ? ']' : c;
            std::size_t start = i++;
            std::string value;
            while (i < n) {
                if (sql[i] == close) {
                    if (close != ']' && i + 1 < n && sql[i + 1] == close) {
                        value.push_back(close);
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                value.push_back(sql[i++]);
            }
            push(TokenKind::Identifier, to_lower(value), value, true, start);
            continue;
        }
        // numbers (digits, leading-dot decimals, exponents, 0x)
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
            std::size_t start = i;
            if (c == '0' && i + 1 < n && (sql[i + 1] == 'x' || sql[i + 1] == 'X')) {
                i += 2;
                while (i < n && std::isxdigit(static_cast<unsigned char>(sql[i]))) ++i;
            } else {
                while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
                if (i < n && sql[i] == '.') {
                    ++i;
                    while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
                }
                if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
                    std::size_t mark = i++;
                    if (i < n && (sql[i] == '+' || sql[i] == '-')) ++i;
                    if (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) {
                        while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
                    } else {
                        i = mark;  // not an exponent after all
                    }
                }
            }
            std::string text(sql.substr(start, i - start));
            push(TokenKind::Number, text, text, false, start);
            continue;
        }
        // words
        if (is_word_start(c)) {
            std::size_t start = i;
            while (i < n && is_word_char(sql[i])) ++i;
            std::string original(sql.substr(start, i - start));
            std::string canon = to_lower(original);
            TokenKind kind = is_sql_keyword(canon) ? TokenKind::Keyword : TokenKind::Identifier;
            push(kind, std::move(canon), std::move(original), false, start);
            continue;
        }
        // multi-char operators kept whole so '<=' is not two tokens
        static const char* two_char_ops[] = {"<=", ">=", "<>", "!=", "||", "=="};
        bool matched = false;
        for (const char* op : two_char_ops) {
            if (c == op[0] && i + 1 < n && sql[i + 1] == op[1]) {
                push(TokenKind::Punct, op, op, false, i);
                i += 2;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        push(TokenKind::Punct, std::string(1, c), std::string(1, c), false, i);
        ++i;
    }
    push(TokenKind::End, "", "", false, n);
    return tokens;
}

}  // namespace sqlink::detail
