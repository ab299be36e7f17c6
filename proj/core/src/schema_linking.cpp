#include "sqlink/schema_linking.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "json_locate.hpp"
#include "sql_lexer.hpp"
#include "sqlink/errors.hpp"

namespace sqlink {

namespace {

using nlohmann::json;

/// "table.column" / "table" (canonicalized) added to `out` when the catalog
/// knows them; returns false when the element named nothing valid.
bool add_element(SchemaSet& out, const DatabaseCatalog& catalog, const std::string& element) {
    std::string text = element;
    // strip decorations models like to add: backticks, quotes, trailing commas
    auto strip = [](std::string& s) {
        while (!s.empty() && (s.front() == '`' || s.front() == '"' || s.front() == '\'' || s.front() == ' ')) {
            s.erase(s.begin());
        }
        while (!s.empty() &&
               (s.back() == '`' || s.back() == '"' || s.back() == '\'' || s.back() == ' ' || s.back() == ',')) {
            s.pop_back();
        }
    };
    strip(text);
    if (text.empty()) return false;

    std::size_t dot = text.find('.');
    if (dot == std::string::npos) {
        if (catalog.has_table(text)) {
            out.add_table(text);
            return true;
        }
        return false;
    }
    std::string table = text.substr(0, dot);
    std::string column = text.substr(dot + 1);
    if (catalog.find_column(table, column) != nullptr) {
        out.add_column(table, column);
        return true;
    }
    return false;
}

void collect_json_strings(const json& node, std::vector<std::string>& out) {
    if (node.is_string()) {
        out.push_back(node.get<std::string>());
    } else if (node.is_array()) {
        for (const auto& item : node) collect_json_strings(item, out);
    } else if (node.is_object()) {
        for (const auto& [key, value] : node.items()) collect_json_strings(value, out);
    }
}

}  // namespace

SchemaSet parse_forward_response(const std::string& reply, const DatabaseCatalog& catalog, int* dropped) {
    SchemaSet out;
    int dropped_count = 0;

    std::vector<std::string> candidates;
    if (auto payload = detail::locate_json_payload(reply)) {
        collect_json_strings(*payload, candidates);
    }
    for (const std::string& candidate : candidates) {
        if (!add_element(out, catalog, candidate)) ++dropped_count;
    }

    if (out.empty()) {
        // fallback: dotted identifiers anywhere in the prose
        auto tokens = detail::lex_sql(reply);
        for (std::size_t i = 0; i + 2 < tokens.size(); ++i) {
            if (tokens[i].kind == detail::TokenKind::Identifier &&
                tokens[i + 1].kind == detail::TokenKind::Punct && tokens[i + 1].text == "." &&
                tokens[i + 2].kind == detail::TokenKind::Identifier) {
                if (catalog.find_column(tokens[i].text, tokens[i + 2].text) != nullptr) {
                    out.add_column(tokens[i].text, tokens[i + 2].text);
                }
            }
        }
    }

    if (dropped != nullptr) *dropped = dropped_count;
    if (out.empty()) {
        throw Error(ErrorCode::EmptyLink, "no valid schema elements in forward-linking reply");
    }
    return out;
}

SchemaSet augment_with_evidence(const SchemaSet& set, const std::string& evidence,
                                const DatabaseCatalog& catalog) {
    SchemaSet out = set;
    if (evidence.empty()) return out;
    for (const detail::Token& token : detail::lex_sql(evidence)) {
        if (token.kind != detail::TokenKind::Identifier && token.kind != detail::TokenKind::Keyword) continue;
        for (const std::string& table : catalog.tables_with_column(token.text)) {
            out.add_column(table, token.text);
        }
    }
    return out;
}

SchemaSet backward_link(const std::string& sql1, const DatabaseCatalog& catalog, BackwardStrategy strategy) {
    if (strategy == BackwardStrategy::Ast) {
        try {
            return extract_columns_ast(sql1, catalog);
        } catch (const Error&) {
            // fall through: broken preliminary SQL still yields name matches
        }
    }
    return extract_columns_name_match(sql1, catalog);
}

SimplifiedCatalog simplify_schema(const DatabaseCatalog& catalog, const ValueSamples& samples,
                                  const SchemaDescriptions& descriptions, const SchemaSet& linked,
                                  const SimplifyOptions& options) {
    if (linked.empty()) {
        throw Error(ErrorCode::EmptyLink, "cannot simplify with an empty linked set");
    }

    std::set<std::string> fk_endpoint_columns;  // "table\0column" canonical
    if (options.retain_keys) {
        for (const ForeignKey& fk : catalog.foreign_keys()) {
            fk_endpoint_columns.insert(canonical_identifier(fk.from_table) + "\0" +
                                       canonical_identifier(fk.from_column));
            fk_endpoint_columns.insert(canonical_identifier(fk.to_table) + "\0" +
                                       canonical_identifier(fk.to_column));
        }
    }

    std::vector<TableInfo> kept_tables;
    for (const TableInfo& table : catalog.tables()) {
        if (!linked.contains_table(table.name)) continue;
        TableInfo kept;
        kept.name = table.name;
        for (const ColumnInfo& column : table.columns) {
            bool keep = linked.contains_column(table.name, column.name);
            if (!keep && options.retain_keys) {
                keep = column.is_primary_key ||
                       fk_endpoint_columns.count(canonical_identifier(table.name) + "\0" +
                                                 canonical_identifier(column.name)) > 0;
            }
            if (keep) kept.columns.push_back(column);
        }
        if (kept.columns.empty()) {
            // table named directly with no linked column: keep it whole so the
            // prompt still shows something joinable
            kept.columns = table.columns;
        }
        kept_tables.push_back(std::move(kept));
    }
    if (kept_tables.empty()) {
        throw Error(ErrorCode::EmptyLink, "linked set selects no tables");
    }

    std::set<std::string> kept_names;
    for (const TableInfo& t : kept_tables) kept_names.insert(canonical_identifier(t.name));

    SimplifiedCatalog out;
    std::vector<ForeignKey> kept_fks;
    for (const ForeignKey& fk : catalog.foreign_keys()) {
        if (kept_names.count(canonical_identifier(fk.from_table)) == 0 ||
            kept_names.count(canonical_identifier(fk.to_table)) == 0) {
            continue;
        }
        // FK endpoints must exist in the restricted tables to stay valid
        bool endpoints_kept = false;
        auto column_kept = [&](const std::string& table, const std::string& column) {
            for (const TableInfo& t : kept_tables) {
                if (canonical_identifier(t.name) != canonical_identifier(table)) continue;
                for (const ColumnInfo& c : t.columns) {
                    if (canonical_identifier(c.name) == canonical_identifier(column)) return true;
                }
            }
            return false;
        };
        endpoints_kept = column_kept(fk.from_table, fk.from_column) && column_kept(fk.to_table, fk.to_column);
        if (endpoints_kept) kept_fks.push_back(fk);
    }

    out.catalog = DatabaseCatalog(catalog.db_id(), std::move(kept_tables), std::move(kept_fks));

    out.samples.sample_seed = samples.sample_seed;
    out.samples.max_cell_len = samples.max_cell_len;
    for (const TableSample& ts : samples.tables) {
        if (kept_names.count(canonical_identifier(ts.table)) == 0) continue;
        TableSample restricted;
        restricted.table = ts.table;
        std::vector<std::size_t> indexes;
        for (std::size_t i = 0; i < ts.columns.size(); ++i) {
            if (out.catalog.find_column(ts.table, ts.columns[i]) != nullptr) {
                restricted.columns.push_back(ts.columns[i]);
                indexes.push_back(i);
            }
        }
        for (const auto& row : ts.rows) {
            std::vector<std::string> cells;
            cells.reserve(indexes.size());
            for (std::size_t i : indexes) {
                if (i < row.size()) cells.push_back(row[i]);
            }
            restricted.rows.push_back(std::move(cells));
        }
        out.samples.tables.push_back(std::move(restricted));
    }

    for (const auto& [key, text] : descriptions.columns) {
        if (out.catalog.find_column(key.first, key.second) != nullptr) {
            out.descriptions.columns[key] = text;
        }
    }
    for (const auto& [table, text] : descriptions.tables) {
        if (out.catalog.has_table(table)) {
            out.descriptions.tables[table] = text;
        }
    }
    return out;
}

SchemaSet gold_schema(const std::string& gold_sql, const DatabaseCatalog& catalog) {
    AstExtractOptions options;
    options.expand_star = false;  // stars contribute the table, not every column
    return extract_columns_ast(gold_sql, catalog, options);
}

double compute_nsr(std::span<const SchemaSet> linked, std::span<const SchemaSet> gold) {
    if (linked.size() != gold.size()) {
        throw Error(ErrorCode::LengthMismatch, "linked and gold lists differ in length");
    }
    long long intersection = 0;
    long long gold_total = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (gold[i].columns().empty()) {
            throw Error(ErrorCode::EmptyGold, "gold set " + std::to_string(i) + " has no columns");
        }
        intersection += static_cast<long long>(set_intersection_columns(linked[i], gold[i]).column_count());
        gold_total += static_cast<long long>(gold[i].column_count());
    }
    return static_cast<double>(intersection) / static_cast<double>(gold_total);
}

double compute_srr(std::span<const SchemaSet> linked, std::span<const SchemaSet> gold) {
    if (linked.size() != gold.size()) {
        throw Error(ErrorCode::LengthMismatch, "linked and gold lists differ in length");
    }
    if (gold.empty()) {
        throw Error(ErrorCode::EmptyGold, "no questions");
    }
    long long covered = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (gold[i].columns().empty()) {
            throw Error(ErrorCode::EmptyGold, "gold set " + std::to_string(i) + " has no columns");
        }
        if (linked[i].covers_columns_of(gold[i])) ++covered;
    }
    return static_cast<double>(covered) / static_cast<double>(gold.size());
}

std::pair<double, double> schema_size_stats(std::span<const SchemaSet> linked) {
    if (linked.empty()) {
        throw Error(ErrorCode::EmptyInput, "no linked sets");
    }
    double tables = 0.0;
    double columns = 0.0;
    for (const SchemaSet& set : linked) {
        tables += static_cast<double>(set.table_count());
        columns += static_cast<double>(set.column_count());
    }
    return {tables / static_cast<double>(linked.size()), columns / static_cast<double>(linked.size())};
}

RecallStats compute_recall_stats(std::span<const SchemaSet> linked, std::span<const SchemaSet> gold) {
    RecallStats stats;
    stats.nsr = compute_nsr(linked, gold);
    stats.srr = compute_srr(linked, gold);
    auto [avg_t, avg_c] = schema_size_stats(linked);
    stats.avg_tables = avg_t;
    stats.avg_columns = avg_c;
    stats.n_questions = static_cast<int>(linked.size());
    return stats;
}

}  // namespace sqlink
