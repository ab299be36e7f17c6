#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sql_lexer.hpp"
#include "sqlink/errors.hpp"
#include "sqlink/sql_analysis.hpp"

namespace sqlink {

namespace {

using detail::Token;
using detail::TokenKind;

/// One SELECT core's name environment plus every reference it makes.
struct Scope {
    Scope* parent = nullptr;
    // alias or bare name (canonical) -> canonical catalog table name
    std::map<std::string, std::string> table_sources;
    // subquery/CTE aliases and FROM names not present in the catalog
    std::set<std::string> derived_sources;
    std::vector<std::pair<std::string, std::string>> qualified_refs;  // (qualifier, column)
    std::vector<std::string> unqualified_refs;
    std::vector<std::string> star_qualifiers;
    bool bare_star = false;
};

constexpr int kMaxNesting = 200;

class Parser {
public:
    Parser(std::string_view sql, const DatabaseCatalog& catalog)
        : tokens_(detail::lex_sql(sql)), catalog_(catalog) {}

    std::vector<const Scope*> parse() {
        const Token& first = peek();
        if (!(is_kw(first, "select") || is_kw(first, "with") || is_kw(first, "values"))) {
            fail("statement must start with SELECT, WITH or VALUES");
        }
        parse_statement(nullptr, {});
        while (accept_punct(";")) {
        }
        if (peek().kind != TokenKind::End) {
            fail("unexpected trailing tokens");
        }
        std::vector<const Scope*> out;
        for (const Scope& s : scopes_) out.push_back(&s);
        return out;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }
    void advance() {
        if (pos_ < tokens_.size() - 1) ++pos_;
    }
    static bool is_kw(const Token& t, std::string_view word) {
        return t.kind == TokenKind::Keyword && t.text == word;
    }
    static bool is_punct(const Token& t, std::string_view p) {
        return t.kind == TokenKind::Punct && t.text == p;
    }
    bool accept_kw(std::string_view word) {
        if (is_kw(peek(), word)) {
            advance();
            return true;
        }
        return false;
    }
    bool accept_punct(std::string_view p) {
        if (is_punct(peek(), p)) {
            advance();
            return true;
        }
        return false;
    }
    void expect_kw(std::string_view word) {
        if (!accept_kw(word)) fail(std::string("expected ") + std::string(word));
    }
    void expect_punct(std::string_view p) {
        if (!accept_punct(p)) fail(std::string("expected '") + std::string(p) + "'");
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::ParseError,
                    what + " at offset " + std::to_string(peek().offset) +
                        (peek().kind == TokenKind::End ? " (end of input)" : " near '" + peek().original + "'"));
    }

    Scope& new_scope(Scope* parent) {
        scopes_.push_back(Scope{});
        scopes_.back().parent = parent;
        return scopes_.back();
    }

    void enter() {
        if (++nesting_ > kMaxNesting) fail("statement nested too deeply");
    }
    void leave() { --nesting_; }

    void parse_statement(Scope* parent, std::set<std::string> ctes) {
        if (accept_kw("with")) {
            accept_kw("recursive");
            do {
                if (peek().kind != TokenKind::Identifier) fail("expected CTE name");
                ctes.insert(peek().text);
                advance();
                if (accept_punct("(")) {  // optional CTE column list
                    do {
                        if (peek().kind != TokenKind::Identifier) fail("expected CTE column name");
                        advance();
                    } while (accept_punct(","));
                    expect_punct(")");
                }
                expect_kw("as");
                accept_kw("not");
                accept_kw("materialized");
                expect_punct("(");
                parse_compound_select(parent, ctes);
                expect_punct(")");
            } while (accept_punct(","));
        }
        parse_compound_select(parent, ctes);
    }

    void parse_compound_select(Scope* parent, const std::set<std::string>& ctes) {
        enter();
        Scope* last = parse_select_core(parent, ctes);
        while (is_kw(peek(), "union") || is_kw(peek(), "intersect") || is_kw(peek(), "except")) {
            advance();
            accept_kw("all");
            last = parse_select_core(parent, ctes);
        }
        if (accept_kw("order")) {
            expect_kw("by");
            scan_expr_list(*last, ctes);
        }
        if (accept_kw("limit")) {
            if (scan_expr(*last, ctes, false) == 0) fail("empty LIMIT clause");
            if (accept_punct(",")) {  // LIMIT n, m
                if (scan_expr(*last, ctes, false) == 0) fail("empty LIMIT clause");
            }
        }
        leave();
    }

    Scope* parse_select_core(Scope* parent, const std::set<std::string>& ctes) {
        Scope& scope = new_scope(parent);
        if (accept_kw("values")) {
            do {
                expect_punct("(");
                scan_expr_list(scope, ctes);
                expect_punct(")");
            } while (accept_punct(","));
            return &scope;
        }
        expect_kw("select");
        if (!accept_kw("distinct")) accept_kw("all");

        bool first_item = true;
        do {
            if (accept_punct("*")) {
                scope.bare_star = true;
            } else {
                if (scan_expr(scope, ctes, /*alias_context=*/true) == 0) {
                    fail(first_item ? "empty select list" : "empty select item");
                }
                if (accept_kw("as")) {
                    if (peek().kind != TokenKind::Identifier) fail("expected alias after AS");
                    advance();
                }
            }
            first_item = false;
        } while (accept_punct(","));

        if (accept_kw("from")) parse_from(scope, ctes);
        if (accept_kw("where")) {
            if (scan_expr(scope, ctes, false) == 0) fail("empty WHERE clause");
        }
        if (accept_kw("group")) {
            expect_kw("by");
            scan_expr_list(scope, ctes);
        }
        if (accept_kw("having")) {
            if (scan_expr(scope, ctes, false) == 0) fail("empty HAVING clause");
        }
        if (accept_kw("window")) {
            do {
                if (peek().kind != TokenKind::Identifier) fail("expected window name");
                advance();
                expect_kw("as");
                expect_punct("(");
                scan_expr_list(scope, ctes);
                expect_punct(")");
            } while (accept_punct(","));
        }
        return &scope;
    }

    void parse_from(Scope& scope, const std::set<std::string>& ctes) {
        parse_table_or_subquery(scope, ctes);
        for (;;) {
            if (accept_punct(",")) {
                parse_table_or_subquery(scope, ctes);
                continue;
            }
            bool natural = accept_kw("natural");
            bool joined = false;
            if (accept_kw("left") || accept_kw("right") || accept_kw("full")) {
                accept_kw("outer");
                expect_kw("join");
                joined = true;
            } else if (accept_kw("inner") || accept_kw("cross")) {
                expect_kw("join");
                joined = true;
            } else if (accept_kw("join")) {
                joined = true;
            } else if (natural) {
                fail("expected JOIN after NATURAL");
            }
            if (!joined) break;
            parse_table_or_subquery(scope, ctes);
            if (accept_kw("on")) {
                if (scan_expr(scope, ctes, false) == 0) fail("empty ON clause");
            } else if (accept_kw("using")) {
                expect_punct("(");
                do {
                    if (peek().kind != TokenKind::Identifier) fail("expected column in USING");
                    scope.unqualified_refs.push_back(peek().text);
                    advance();
                } while (accept_punct(","));
                expect_punct(")");
            }
        }
    }

    void parse_table_or_subquery(Scope& scope, const std::set<std::string>& ctes) {
        if (accept_punct("(")) {
            const Token& next = peek();
            if (is_kw(next, "select") || is_kw(next, "with") || is_kw(next, "values")) {
                enter();
                parse_statement(&scope, ctes);
                leave();
                expect_punct(")");
                std::string alias = parse_optional_alias();
                if (!alias.empty()) scope.derived_sources.insert(alias);
            } else {
                parse_from(scope, ctes);  // parenthesized join group
                expect_punct(")");
            }
            return;
        }
        if (peek().kind != TokenKind::Identifier) fail("expected table name or subquery");
        std::string name = peek().text;
        advance();
        if (accept_punct(".")) {  // schema-qualified: keep the table part
            if (peek().kind != TokenKind::Identifier) fail("expected table name after '.'");
            name = peek().text;
            advance();
        }
        std::string alias = parse_optional_alias();
        const std::string& source_name = alias.empty() ? name : alias;
        if (ctes.count(name) > 0 || !catalog_.has_table(name)) {
            scope.derived_sources.insert(source_name);
        } else {
            scope.table_sources[source_name] = canonical_identifier(name);
        }
    }

    std::string parse_optional_alias() {
        if (accept_kw("as")) {
            if (peek().kind != TokenKind::Identifier) fail("expected alias after AS");
            std::string alias = peek().text;
            advance();
            return alias;
        }
        if (peek().kind == TokenKind::Identifier) {
            std::string alias = peek().text;
            advance();
            return alias;
        }
        return "";
    }

    void scan_expr_list(Scope& scope, const std::set<std::string>& ctes) {
        do {
            if (scan_expr(scope, ctes, false) == 0) fail("empty expression");
        } while (accept_punct(","));
    }

    static bool is_stop_keyword(const Token& t) {
        static const std::set<std::string> stops = {
            "from",   "where",  "group", "having", "order", "limit",  "union",  "intersect",
            "except", "on",     "join",  "left",   "right", "full",   "inner",  "outer",
            "cross",  "natural", "using", "window", "as",   "when",   "then",   "else",
            "end",
        };
        return t.kind == TokenKind::Keyword && stops.count(t.text) > 0;
    }

    /// Generic expression region: collects column references, recurses into
    /// subqueries, and stops before ',' / ')' / ';' or a clause keyword at
    /// depth 0. Returns the number of token groups consumed. Two adjacent
    /// value tokens are a parse error except as one trailing implicit alias
    /// when alias_context is set.
    int scan_expr(Scope& scope, const std::set<std::string>& ctes, bool alias_context) {
        int consumed = 0;
        int depth = 0;
        bool last_was_value = false;
        bool pending_alias = false;
        bool pending_alias_simple = false;

        auto note_value = [&](bool is_value, bool simple_ident = false) {
            if (is_value && pending_alias) fail("unexpected token sequence");
            if (is_value && last_was_value) {
                pending_alias = true;
                pending_alias_simple = simple_ident;
            }
            last_was_value = is_value;
        };

        for (;;) {
            const Token& tok = peek();
            if (tok.kind == TokenKind::End) break;
            if (depth == 0) {
                if (tok.kind == TokenKind::Punct && (tok.text == "," || tok.text == ")" || tok.text == ";")) break;
                if (is_stop_keyword(tok)) break;
            }

            if (tok.kind == TokenKind::Punct && tok.text == "(") {
                const Token& next = peek(1);
                advance();
                ++consumed;
                if (is_kw(next, "select") || is_kw(next, "with") || is_kw(next, "values")) {
                    enter();
                    parse_statement(&scope, ctes);
                    leave();
                    expect_punct(")");
                    note_value(true);
                } else {
                    ++depth;
                    last_was_value = false;
                }
                continue;
            }
            if (tok.kind == TokenKind::Punct && tok.text == ")") {
                if (depth == 0) break;  // unreachable, kept for clarity
                advance();
                ++consumed;
                --depth;
                note_value(true);
                continue;
            }
            if (is_kw(tok, "case")) {
                advance();
                ++consumed;
                scan_case_body(scope, ctes, consumed);
                note_value(true);
                continue;
            }
            if (is_kw(tok, "cast")) {
                advance();
                ++consumed;
                expect_punct("(");
                if (scan_expr(scope, ctes, false) == 0) fail("empty CAST expression");
                expect_kw("as");
                while (!(is_punct(peek(), ")") || peek().kind == TokenKind::End)) {
                    advance();  // type-name tokens are not column refs
                    ++consumed;
                }
                expect_punct(")");
                note_value(true);
                continue;
            }
            if (tok.kind == TokenKind::Keyword) {
                bool valueish = tok.text == "null" || tok.text == "true" || tok.text == "false" ||
                                tok.text == "current_date" || tok.text == "current_time" ||
                                tok.text == "current_timestamp";
                advance();
                ++consumed;
                note_value(valueish);
                continue;
            }
            if (tok.kind == TokenKind::Identifier) {
                // dotted chain: a, a.b, a.b.c, a.* — or a function name
                std::vector<std::string> parts{tok.text};
                advance();
                ++consumed;
                bool star_tail = false;
                while (is_punct(peek(), ".")) {
                    advance();
                    ++consumed;
                    if (accept_punct("*")) {
                        ++consumed;
                        star_tail = true;
                        break;
                    }
                    if (peek().kind != TokenKind::Identifier) fail("expected identifier after '.'");
                    parts.push_back(peek().text);
                    advance();
                    ++consumed;
                }
                if (star_tail) {
                    scope.star_qualifiers.push_back(parts.back());
                    note_value(true);
                    continue;
                }
                if (parts.size() == 1 && is_punct(peek(), "(")) {
                    last_was_value = false;  // function name, not a column
                    continue;
                }
                if (parts.size() == 1) {
                    scope.unqualified_refs.push_back(parts[0]);
                } else {
                    scope.qualified_refs.emplace_back(parts[parts.size() - 2], parts.back());
                }
                note_value(true, parts.size() == 1);
                continue;
            }
            if (tok.kind == TokenKind::Number || tok.kind == TokenKind::String) {
                advance();
                ++consumed;
                note_value(true);
                continue;
            }
            // operators and parameters
            bool param = tok.kind == TokenKind::Punct && (tok.text == "?" || tok.text == "@" || tok.text == ":");
            advance();
            ++consumed;
            note_value(param);
        }

        if (depth != 0) fail("unbalanced parentheses");
        if (pending_alias) {
            if (!alias_context || !pending_alias_simple) fail("unexpected token sequence");
            scope.unqualified_refs.pop_back();  // trailing implicit alias, not a column
        }
        return consumed;
    }

    /// Between CASE and END. WHEN/THEN/ELSE separate branch expressions.
    void scan_case_body(Scope& scope, const std::set<std::string>& ctes, int& consumed) {
        bool saw_anything = false;
        for (;;) {
            const Token& tok = peek();
            if (tok.kind == TokenKind::End) fail("unterminated CASE expression");
            if (is_kw(tok, "end")) {
                if (!saw_anything) fail("empty CASE expression");
                advance();
                ++consumed;
                return;
            }
            if (is_kw(tok, "when") || is_kw(tok, "then") || is_kw(tok, "else")) {
                advance();
                ++consumed;
                saw_anything = true;
                continue;
            }
            int n = scan_expr(scope, ctes, false);
            if (n == 0) fail("unexpected token in CASE expression");
            consumed += n;
            saw_anything = true;
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    const DatabaseCatalog& catalog_;
    std::deque<Scope> scopes_;
    int nesting_ = 0;
};

/// Maps collected references onto catalog elements, honoring alias scoping.
SchemaSet resolve_scopes(const std::vector<const Scope*>& scopes, const DatabaseCatalog& catalog,
                         const AstExtractOptions& options) {
    SchemaSet result;

    // nullptr = no such source; empty string = a derived (non-table) source
    auto find_source = [](const Scope* scope, const std::string& name) -> const std::string* {
        static const std::string derived;
        for (const Scope* s = scope; s != nullptr; s = s->parent) {
            auto it = s->table_sources.find(name);
            if (it != s->table_sources.end()) return &it->second;
            if (s->derived_sources.count(name) > 0) return &derived;
        }
        return nullptr;
    };

    for (const Scope* scope : scopes) {
        for (const auto& [alias, table] : scope->table_sources) {
            result.add_table(table);
        }
        for (const auto& [qualifier, column] : scope->qualified_refs) {
            const std::string* source = find_source(scope, qualifier);
            if (source != nullptr) {
                if (!source->empty() && catalog.find_column(*source, column) != nullptr) {
                    result.add_column(*source, column);
                }
            } else if (catalog.find_column(qualifier, column) != nullptr) {
                // qualifier names a catalog table that never appeared in FROM
                result.add_table(qualifier);
                result.add_column(qualifier, column);
            }
        }
        for (const std::string& column : scope->unqualified_refs) {
            for (const Scope* s = scope; s != nullptr; s = s->parent) {
                bool found = false;
                for (const auto& [alias, table] : s->table_sources) {
                    if (catalog.find_column(table, column) != nullptr) {
                        result.add_column(table, column);
                        found = true;
                    }
                }
                if (found) break;
                if (!s->derived_sources.empty()) break;  // projected by a subquery/CTE
            }
        }
        if (options.expand_star) {
            auto expand_table = [&](const std::string& table) {
                const TableInfo* info = catalog.find_table(table);
                if (info == nullptr) return;
                for (const ColumnInfo& c : info->columns) result.add_column(info->name, c.name);
            };
            if (scope->bare_star) {
                for (const auto& [alias, table] : scope->table_sources) expand_table(table);
            }
            for (const std::string& qualifier : scope->star_qualifiers) {
                const std::string* source = find_source(scope, qualifier);
                if (source != nullptr && !source->empty()) expand_table(*source);
            }
        }
    }
    return result;
}

}  // namespace

SchemaSet extract_columns_ast(std::string_view sql, const DatabaseCatalog& catalog,
                              const AstExtractOptions& options) {
    Parser parser(sql, catalog);
    return resolve_scopes(parser.parse(), catalog, options);
}

SchemaSet extract_columns_name_match(std::string_view sql, const DatabaseCatalog& catalog) {
    SchemaSet result;
    for (const detail::Token& token : detail::lex_sql(sql)) {
        if (token.kind != TokenKind::Identifier && token.kind != TokenKind::Keyword) continue;
        // bare keywords cannot be column names, but quoted ones are looked up
        // like any identifier
        if (token.kind == TokenKind::Keyword && !token.quoted) continue;
        for (const std::string& table : catalog.tables_with_column(token.text)) {
            result.add_column(table, token.text);
        }
        if (catalog.has_table(token.text)) {
            result.add_table(token.text);
        }
    }
    return result;
}

}  // namespace sqlink
