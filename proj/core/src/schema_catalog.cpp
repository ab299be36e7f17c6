#include "sqlink/schema_catalog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "sqlink/errors.hpp"
#include "sqlite_util.hpp"

namespace sqlink {

namespace fs = std::filesystem;
using detail::SqliteDb;
using detail::SqliteStmt;
using detail::quote_identifier;

namespace {

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string render_double(double v) {
    double rounded = std::round(v * 1e6) / 1e6;
    if (std::fabs(rounded) < 9.0e18) {
        long long as_int = std::llround(rounded);
        if (std::fabs(rounded - static_cast<double>(as_int)) < 1e-9) {
            return std::to_string(as_int);
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", rounded);
    std::string out(buf);
    while (!out.empty() && out.back() == '0') out.pop_back();
    if (!out.empty() && out.back() == '.') out.pop_back();
    return out;
}

std::string render_sample_cell(sqlite3_stmt* stmt, int col, int max_cell_len) {
    std::string text;
    switch (sqlite3_column_type(stmt, col)) {
        case SQLITE_NULL:
            return "NULL";
        case SQLITE_INTEGER:
            text = std::to_string(sqlite3_column_int64(stmt, col));
            break;
        case SQLITE_FLOAT:
            text = render_double(sqlite3_column_double(stmt, col));
            break;
        case SQLITE_BLOB: {
            const auto* bytes = static_cast<const unsigned char*>(sqlite3_column_blob(stmt, col));
            int n = sqlite3_column_bytes(stmt, col);
            text = "x'";
            static const char* hex = "0123456789ABCDEF";
            for (int i = 0; i < n; ++i) {
                text.push_back(hex[bytes[i] >> 4]);
                text.push_back(hex[bytes[i] & 0xF]);
            }
            text.push_back('\'');
            break;
        }
        default: {
            const unsigned char* s = sqlite3_column_text(stmt, col);
            text = s ? reinterpret_cast<const char*>(s) : "";
            break;
        }
    }
    if (max_cell_len > 0 && text.size() > static_cast<std::size_t>(max_cell_len)) {
        text = text.substr(0, static_cast<std::size_t>(max_cell_len)) + "...";
    }
    return text;
}

bool looks_numeric(const std::string& cell) {
    if (cell.empty()) return false;
    std::size_t i = (cell[0] == '-' || cell[0] == '+') ? 1 : 0;
    if (i == cell.size()) return false;
    bool dot = false;
    for (; i < cell.size(); ++i) {
        if (cell[i] == '.' && !dot) {
            dot = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(cell[i]))) return false;
    }
    return true;
}

std::string quote_cell_for_prompt(const std::string& cell) {
    if (cell == "NULL" || looks_numeric(cell)) return cell;
    std::string out = "'";
    for (char c : cell) {
        out.push_back(c);
        if (c == '\'') out.push_back('\'');
    }
    out.push_back('\'');
    return out;
}

}  // namespace

DatabaseCatalog::DatabaseCatalog(std::string db_id, std::vector<TableInfo> tables,
                                 std::vector<ForeignKey> foreign_keys)
    : db_id_(std::move(db_id)), tables_(std::move(tables)), foreign_keys_(std::move(foreign_keys)) {
    build_indexes();
}

void DatabaseCatalog::build_indexes() {
    table_index_.clear();
    column_owners_.clear();
    for (std::size_t i = 0; i < tables_.size(); ++i) {
        const TableInfo& table = tables_[i];
        if (table.columns.empty()) {
            throw Error(ErrorCode::InvalidCatalog, "table '" + table.name + "' has no columns");
        }
        std::string canon = canonical_identifier(table.name);
        if (!table_index_.emplace(canon, i).second) {
            throw Error(ErrorCode::InvalidCatalog, "duplicate table name '" + table.name + "'");
        }
        std::set<std::string> seen;
        for (const ColumnInfo& column : table.columns) {
            std::string col_canon = canonical_identifier(column.name);
            if (!seen.insert(col_canon).second) {
                throw Error(ErrorCode::InvalidCatalog,
                            "duplicate column '" + column.name + "' in table '" + table.name + "'");
            }
            column_owners_[col_canon].push_back(canon);
        }
    }
    for (const ForeignKey& fk : foreign_keys_) {
        if (find_column(fk.from_table, fk.from_column) == nullptr ||
            find_column(fk.to_table, fk.to_column) == nullptr) {
            throw Error(ErrorCode::InvalidCatalog,
                        "foreign key references unknown element: " + fk.from_table + "." + fk.from_column +
                            " -> " + fk.to_table + "." + fk.to_column);
        }
    }
}

const TableInfo* DatabaseCatalog::find_table(std::string_view name) const {
    auto it = table_index_.find(canonical_identifier(name));
    return it == table_index_.end() ? nullptr : &tables_[it->second];
}

const ColumnInfo* DatabaseCatalog::find_column(std::string_view table, std::string_view column) const {
    const TableInfo* t = find_table(table);
    if (t == nullptr) return nullptr;
    std::string canon = canonical_identifier(column);
    for (const ColumnInfo& c : t->columns) {
        if (canonical_identifier(c.name) == canon) return &c;
    }
    return nullptr;
}

const std::vector<std::string>& DatabaseCatalog::tables_with_column(std::string_view column) const {
    static const std::vector<std::string> empty;
    auto it = column_owners_.find(canonical_identifier(column));
    return it == column_owners_.end() ? empty : it->second;
}

std::size_t DatabaseCatalog::column_count() const {
    std::size_t n = 0;
    for (const TableInfo& t : tables_) n += t.columns.size();
    return n;
}

SchemaSet DatabaseCatalog::full_schema_set() const {
    SchemaSet out;
    for (const TableInfo& t : tables_) {
        out.add_table(t.name);
        for (const ColumnInfo& c : t.columns) out.add_column(t.name, c.name);
    }
    return out;
}

DatabaseCatalog DatabaseCatalog::introspect(const fs::path& db_path, std::string db_id) {
    if (!fs::exists(db_path)) {
        throw Error(ErrorCode::FileNotFound, db_path.string());
    }
    if (db_id.empty()) db_id = db_path.stem().string();

    SqliteDb db;
    if (db.open_readonly(db_path.string()) != SQLITE_OK) {
        throw Error(ErrorCode::NotADatabase, db_path.string() + ": " + db.errmsg());
    }

    SqliteStmt list;
    int rc = list.prepare(db.get(),
                          "SELECT name FROM sqlite_master WHERE type='table' "
                          "AND name NOT LIKE 'sqlite_%' ORDER BY rowid");
    if (rc != SQLITE_OK) {
        throw Error(ErrorCode::NotADatabase, db_path.string() + ": " + db.errmsg());
    }

    std::vector<std::string> table_names;
    while ((rc = list.step()) == SQLITE_ROW) {
        const unsigned char* name = sqlite3_column_text(list.get(), 0);
        if (name != nullptr) table_names.emplace_back(reinterpret_cast<const char*>(name));
    }
    if (rc != SQLITE_DONE) {
        throw Error(ErrorCode::NotADatabase, db_path.string() + ": " + db.errmsg());
    }
    if (table_names.empty()) {
        throw Error(ErrorCode::EmptySchema, db_path.string() + " contains no user tables");
    }

    std::vector<TableInfo> tables;
    tables.reserve(table_names.size());
    for (const std::string& name : table_names) {
        TableInfo info;
        info.name = name;
        SqliteStmt cols;
        if (cols.prepare(db.get(), "PRAGMA table_info(" + quote_identifier(name) + ")") != SQLITE_OK) {
            throw Error(ErrorCode::NotADatabase, "table_info failed for " + name + ": " + db.errmsg());
        }
        while (cols.step() == SQLITE_ROW) {
            ColumnInfo column;
            const unsigned char* cname = sqlite3_column_text(cols.get(), 1);
            const unsigned char* ctype = sqlite3_column_text(cols.get(), 2);
            column.name = cname ? reinterpret_cast<const char*>(cname) : "";
            column.declared_type = ctype ? reinterpret_cast<const char*>(ctype) : "";
            column.is_primary_key = sqlite3_column_int(cols.get(), 5) > 0;
            info.columns.push_back(std::move(column));
        }
        tables.push_back(std::move(info));
    }

    // FK endpoints referencing tables or columns that do not exist (present in
    // some benchmark databases) are dropped rather than surfaced as errors.
    std::vector<ForeignKey> fks;
    DatabaseCatalog probe(db_id, tables, {});
    for (const std::string& name : table_names) {
        SqliteStmt fk_list;
        if (fk_list.prepare(db.get(), "PRAGMA foreign_key_list(" + quote_identifier(name) + ")") != SQLITE_OK) {
            continue;
        }
        while (fk_list.step() == SQLITE_ROW) {
            ForeignKey fk;
            fk.from_table = name;
            const unsigned char* to_table = sqlite3_column_text(fk_list.get(), 2);
            const unsigned char* from_col = sqlite3_column_text(fk_list.get(), 3);
            const unsigned char* to_col = sqlite3_column_text(fk_list.get(), 4);
            fk.to_table = to_table ? reinterpret_cast<const char*>(to_table) : "";
            fk.from_column = from_col ? reinterpret_cast<const char*>(from_col) : "";
            if (to_col != nullptr) {
                fk.to_column = reinterpret_cast<const char*>(to_col);
            } else {
                // implicit reference to the target's primary key
                const TableInfo* target = probe.find_table(fk.to_table);
                if (target != nullptr) {
                    for (const ColumnInfo& c : target->columns) {
                        if (c.is_primary_key) {
                            fk.to_column = c.name;
                            break;
                        }
                    }
                }
            }
            if (probe.find_column(fk.from_table, fk.from_column) != nullptr &&
                probe.find_column(fk.to_table, fk.to_column) != nullptr) {
                fks.push_back(std::move(fk));
            }
        }
    }
    return DatabaseCatalog(std::move(db_id), std::move(tables), std::move(fks));
}

ValueSamples sample_values(const DatabaseCatalog& catalog, const fs::path& db_path, int rows_per_table,
                           unsigned seed, int max_cell_len) {
    if (rows_per_table < 1) {
        throw Error(ErrorCode::QueryFailure, "rows_per_table must be >= 1");
    }
    SqliteDb db;
    if (db.open_readonly(db_path.string()) != SQLITE_OK) {
        throw Error(ErrorCode::QueryFailure, db_path.string() + ": " + db.errmsg());
    }

    ValueSamples samples;
    samples.sample_seed = seed;
    samples.max_cell_len = max_cell_len;

    for (const TableInfo& table : catalog.tables()) {
        TableSample ts;
        ts.table = table.name;
        for (const ColumnInfo& c : table.columns) ts.columns.push_back(c.name);

        SqliteStmt count_stmt;
        std::string quoted = quote_identifier(table.name);
        if (count_stmt.prepare(db.get(), "SELECT COUNT(*) FROM " + quoted) != SQLITE_OK ||
            count_stmt.step() != SQLITE_ROW) {
            throw Error(ErrorCode::QueryFailure, "cannot read table " + table.name + ": " + db.errmsg());
        }
        long long total = sqlite3_column_int64(count_stmt.get(), 0);
        count_stmt.finalize();

        if (total > 0) {
            long long want = std::min<long long>(rows_per_table, total);
            // Seeded per table so adding tables never reshuffles earlier ones.
            std::mt19937_64 rng(static_cast<std::uint64_t>(seed) ^ fnv1a64(canonical_identifier(table.name)));
            std::set<long long> offsets;
            std::uniform_int_distribution<long long> dist(0, total - 1);
            while (static_cast<long long>(offsets.size()) < want) offsets.insert(dist(rng));

            for (long long offset : offsets) {
                SqliteStmt row_stmt;
                std::string q = "SELECT * FROM " + quoted + " LIMIT 1 OFFSET " + std::to_string(offset);
                if (row_stmt.prepare(db.get(), q) != SQLITE_OK) {
                    throw Error(ErrorCode::QueryFailure, "cannot read table " + table.name + ": " + db.errmsg());
                }
                if (row_stmt.step() == SQLITE_ROW) {
                    int ncol = sqlite3_column_count(row_stmt.get());
                    std::vector<std::string> row;
                    row.reserve(ncol);
                    for (int i = 0; i < ncol; ++i) {
                        row.push_back(render_sample_cell(row_stmt.get(), i, max_cell_len));
                    }
                    ts.rows.push_back(std::move(row));
                }
            }
        }
        samples.tables.push_back(std::move(ts));
    }
    return samples;
}

const std::string* SchemaDescriptions::column_description(std::string_view table, std::string_view column) const {
    auto it = columns.find({canonical_identifier(table), canonical_identifier(column)});
    return it == columns.end() ? nullptr : &it->second;
}

namespace {

/// RFC4180-ish CSV reader: quoted fields, "" escapes, embedded newlines, CRLF.
std::vector<std::vector<std::string>> parse_csv(const std::string& content) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    std::size_t i = 0;
    // strip UTF-8 BOM
    if (content.size() >= 3 && content.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;

    auto end_field = [&] {
        row.push_back(field);
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(row);
        row.clear();
        any = false;
    };

    for (; i < content.size(); ++i) {
        char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                any = true;
                break;
            case ',':
                end_field();
                any = true;
                break;
            case '\r':
                break;
            case '\n':
                if (any || !field.empty() || !row.empty()) end_row();
                break;
            default:
                field.push_back(c);
                any = true;
                break;
        }
    }
    if (any || !field.empty() || !row.empty()) end_row();
    return rows;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

SchemaDescriptions load_descriptions(const DatabaseCatalog& catalog, const fs::path& description_dir) {
    SchemaDescriptions out;
    if (!fs::exists(description_dir) || !fs::is_directory(description_dir)) {
        return out;  // absent descriptions are not an error
    }

    std::map<std::string, fs::path> files_by_stem;
    for (const auto& entry : fs::directory_iterator(description_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            files_by_stem[canonical_identifier(entry.path().stem().string())] = entry.path();
        }
    }

    for (const TableInfo& table : catalog.tables()) {
        auto it = files_by_stem.find(canonical_identifier(table.name));
        if (it == files_by_stem.end()) continue;

        std::ifstream in(it->second, std::ios::binary);
        if (!in) {
            throw Error(ErrorCode::MalformedDescriptionFile, "cannot open " + it->second.string());
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        auto rows = parse_csv(buffer.str());
        if (rows.empty()) {
            throw Error(ErrorCode::MalformedDescriptionFile, it->second.string() + " is empty");
        }

        const auto& header = rows.front();
        int col_name_idx = -1, col_desc_idx = -1, val_desc_idx = -1;
        for (std::size_t i = 0; i < header.size(); ++i) {
            std::string h = canonical_identifier(trim(header[i]));
            if (h == "original_column_name") col_name_idx = static_cast<int>(i);
            else if (h == "column_description") col_desc_idx = static_cast<int>(i);
            else if (h == "value_description") val_desc_idx = static_cast<int>(i);
        }
        if (col_name_idx < 0) {
            throw Error(ErrorCode::MalformedDescriptionFile,
                        it->second.string() + " lacks an original_column_name header");
        }

        std::string table_canon = canonical_identifier(table.name);
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& row = rows[r];
            auto cell = [&](int idx) -> std::string {
                return (idx >= 0 && idx < static_cast<int>(row.size())) ? trim(row[idx]) : "";
            };
            std::string column = cell(col_name_idx);
            if (column.empty()) continue;
            if (catalog.find_column(table.name, column) == nullptr) {
                out.warnings.push_back("unknown column " + table.name + "." + column + " in " +
                                       it->second.filename().string());
                continue;
            }
            std::string desc = cell(col_desc_idx);
            std::string value_desc = cell(val_desc_idx);
            if (!value_desc.empty()) {
                desc += desc.empty() ? "(" + value_desc + ")" : " (" + value_desc + ")";
            }
            out.columns[{table_canon, canonical_identifier(column)}] = desc;
        }
    }
    return out;
}

SchemaDescriptions descriptions_from_map(const DatabaseCatalog& catalog,
                                         const std::map<std::pair<std::string, std::string>, std::string>& column_texts,
                                         const std::map<std::string, std::string>& table_texts) {
    SchemaDescriptions out;
    for (const auto& [key, text] : column_texts) {
        if (catalog.find_column(key.first, key.second) == nullptr) {
            out.warnings.push_back("unknown column " + key.first + "." + key.second + " dropped");
            continue;
        }
        out.columns[{canonical_identifier(key.first), canonical_identifier(key.second)}] = text;
    }
    for (const auto& [table, text] : table_texts) {
        if (!catalog.has_table(table)) {
            out.warnings.push_back("unknown table " + table + " dropped");
            continue;
        }
        out.tables[canonical_identifier(table)] = text;
    }
    return out;
}

std::string render_schema_prompt(const DatabaseCatalog& catalog, const ValueSamples& samples,
                                 const SchemaDescriptions* descriptions, const SchemaSet* subset,
                                 const RenderOptions& options) {
    if (subset != nullptr) {
        for (const auto& [table, column] : subset->columns()) {
            if (catalog.find_column(table, column) == nullptr) {
                throw Error(ErrorCode::UnknownSchemaElement, table + "." + column);
            }
        }
        for (const auto& table : subset->tables()) {
            if (!catalog.has_table(table)) {
                throw Error(ErrorCode::UnknownSchemaElement, table);
            }
        }
    }

    bool use_descriptions = options.include_descriptions && descriptions != nullptr && !descriptions->empty();

    std::ostringstream out;
    out << "Database: " << catalog.db_id() << "\n";

    std::set<std::string> retained_tables;
    for (const TableInfo& table : catalog.tables()) {
        std::string table_canon = canonical_identifier(table.name);
        if (subset != nullptr && !subset->contains_table(table.name)) continue;
        retained_tables.insert(table_canon);

        std::vector<const ColumnInfo*> retained_columns;
        for (const ColumnInfo& column : table.columns) {
            if (subset == nullptr || subset->contains_column(table.name, column.name)) {
                retained_columns.push_back(&column);
            }
        }

        out << "\nTable: " << table.name << "\n";
        if (use_descriptions) {
            auto it = descriptions->tables.find(table_canon);
            if (it != descriptions->tables.end() && !it->second.empty()) {
                out << "Description: " << it->second << "\n";
            }
        }
        out << "Columns:\n";
        for (const ColumnInfo* column : retained_columns) {
            out << "  " << column->name;
            if (!column->declared_type.empty()) {
                out << " (" << column->declared_type << (column->is_primary_key ? ", primary key" : "") << ")";
            } else if (column->is_primary_key) {
                out << " (primary key)";
            }
            if (use_descriptions) {
                const std::string* desc = descriptions->column_description(table.name, column->name);
                if (desc != nullptr && !desc->empty()) out << ": " << *desc;
            }
            out << "\n";
        }

        if (options.include_samples) {
            const TableSample* sample = nullptr;
            for (const TableSample& ts : samples.tables) {
                if (canonical_identifier(ts.table) == table_canon) {
                    sample = &ts;
                    break;
                }
            }
            if (sample != nullptr && !sample->rows.empty()) {
                std::vector<std::size_t> cell_indexes;
                std::ostringstream header;
                for (std::size_t i = 0; i < sample->columns.size(); ++i) {
                    for (const ColumnInfo* column : retained_columns) {
                        if (canonical_identifier(sample->columns[i]) == canonical_identifier(column->name)) {
                            if (!cell_indexes.empty()) header << ", ";
                            header << sample->columns[i];
                            cell_indexes.push_back(i);
                            break;
                        }
                    }
                }
                if (!cell_indexes.empty()) {
                    out << "Sample rows (" << header.str() << "):\n";
                    for (const auto& row : sample->rows) {
                        out << "  (";
                        for (std::size_t k = 0; k < cell_indexes.size(); ++k) {
                            if (k > 0) out << ", ";
                            if (cell_indexes[k] < row.size()) out << quote_cell_for_prompt(row[cell_indexes[k]]);
                        }
                        out << ")\n";
                    }
                }
            }
        }
    }

    std::ostringstream fk_lines;
    for (const ForeignKey& fk : catalog.foreign_keys()) {
        if (retained_tables.count(canonical_identifier(fk.from_table)) == 0 ||
            retained_tables.count(canonical_identifier(fk.to_table)) == 0) {
            continue;
        }
        fk_lines << "  " << fk.from_table << "." << fk.from_column << " -> " << fk.to_table << "."
                 << fk.to_column << "\n";
    }
    std::string fk_text = fk_lines.str();
    if (!fk_text.empty()) {
        out << "\nForeign keys:\n" << fk_text;
    }
    return out.str();
}

std::string render_samples_block(const DatabaseCatalog& catalog, const ValueSamples& samples,
                                 const SchemaSet* subset) {
    std::ostringstream out;
    for (const TableInfo& table : catalog.tables()) {
        if (subset != nullptr && !subset->contains_table(table.name)) continue;
        const TableSample* sample = nullptr;
        for (const TableSample& ts : samples.tables) {
            if (canonical_identifier(ts.table) == canonical_identifier(table.name)) {
                sample = &ts;
                break;
            }
        }
        if (sample == nullptr || sample->rows.empty()) continue;

        std::vector<std::size_t> cell_indexes;
        std::ostringstream header;
        for (std::size_t i = 0; i < sample->columns.size(); ++i) {
            bool keep = subset == nullptr || subset->contains_column(table.name, sample->columns[i]);
            if (keep && catalog.find_column(table.name, sample->columns[i]) != nullptr) {
                if (!cell_indexes.empty()) header << ", ";
                header << sample->columns[i];
                cell_indexes.push_back(i);
            }
        }
        if (cell_indexes.empty()) continue;
        out << sample->table << " (" << header.str() << "):\n";
        for (const auto& row : sample->rows) {
            out << "  (";
            for (std::size_t k = 0; k < cell_indexes.size(); ++k) {
                if (k > 0) out << ", ";
                if (cell_indexes[k] < row.size()) out << quote_cell_for_prompt(row[cell_indexes[k]]);
            }
            out << ")\n";
        }
    }
    return out.str();
}

std::string render_descriptions_block(const DatabaseCatalog& catalog, const SchemaDescriptions& descriptions,
                                      const SchemaSet* subset) {
    std::ostringstream out;
    for (const TableInfo& table : catalog.tables()) {
        if (subset != nullptr && !subset->contains_table(table.name)) continue;
        for (const ColumnInfo& column : table.columns) {
            if (subset != nullptr && !subset->contains_column(table.name, column.name)) continue;
            const std::string* desc = descriptions.column_description(table.name, column.name);
            if (desc != nullptr && !desc->empty()) {
                out << table.name << "." << column.name << ": " << *desc << "\n";
            }
        }
    }
    return out.str();
}

}  // namespace sqlink
