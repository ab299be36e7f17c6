#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sqlink/schema_set.hpp"

namespace sqlink {

struct ColumnInfo {
    std::string name;
    std::string declared_type;
    bool is_primary_key = false;

    friend bool operator==(const ColumnInfo&, const ColumnInfo&) = default;
};

struct TableInfo {
    std::string name;
    std::vector<ColumnInfo> columns;

    friend bool operator==(const TableInfo&, const TableInfo&) = default;
};

struct ForeignKey {
    std::string from_table;
    std::string from_column;
    std::string to_table;
    std::string to_column;

    friend bool operator==(const ForeignKey&, const ForeignKey&) = default;
};

/// Typed snapshot of one database's schema: tables in declaration order,
/// columns with declared types and primary-key flags, and foreign keys.
/// Immutable after construction; name lookups are case-insensitive.
class DatabaseCatalog {
public:
    DatabaseCatalog() = default;
    DatabaseCatalog(std::string db_id, std::vector<TableInfo> tables, std::vector<ForeignKey> foreign_keys);

    static DatabaseCatalog introspect(const std::filesystem::path& db_path, std::string db_id = {});

    const std::string& db_id() const { return db_id_; }
    const std::vector<TableInfo>& tables() const { return tables_; }
    const std::vector<ForeignKey>& foreign_keys() const { return foreign_keys_; }

    const TableInfo* find_table(std::string_view name) const;
    const ColumnInfo* find_column(std::string_view table, std::string_view column) const;
    /// Canonical names of all tables owning a column with this name.
    const std::vector<std::string>& tables_with_column(std::string_view column) const;
    bool has_table(std::string_view name) const { return find_table(name) != nullptr; }

    std::size_t table_count() const { return tables_.size(); }
    std::size_t column_count() const;
    SchemaSet full_schema_set() const;

    friend bool operator==(const DatabaseCatalog& a, const DatabaseCatalog& b) {
        return a.tables_ == b.tables_ && a.foreign_keys_ == b.foreign_keys_;
    }

private:
    void build_indexes();

    std::string db_id_;
    std::vector<TableInfo> tables_;
    std::vector<ForeignKey> foreign_keys_;
    std::map<std::string, std::size_t> table_index_;                    // canonical -> position
    std::map<std::string, std::vector<std::string>> column_owners_;     // canonical column -> canonical tables
};

struct TableSample {
    std::string table;                                // original casing
    std::vector<std::string> columns;                 // original casing, declaration order
    std::vector<std::vector<std::string>> rows;       // rendered cells, truncated
};

/// Per-table sampled rows for the prompt's value-sample block.
struct ValueSamples {
    std::vector<TableSample> tables;                  // catalog order
    unsigned sample_seed = 0;
    int max_cell_len = 0;
};

ValueSamples sample_values(const DatabaseCatalog& catalog, const std::filesystem::path& db_path,
                           int rows_per_table, unsigned seed, int max_cell_len);

/// Column and table description texts, keyed by canonical names.
struct SchemaDescriptions {
    std::map<std::pair<std::string, std::string>, std::string> columns;
    std::map<std::string, std::string> tables;
    std::vector<std::string> warnings;

    bool empty() const { return columns.empty() && tables.empty(); }
    const std::string* column_description(std::string_view table, std::string_view column) const;
};

/// Loads BIRD-style database_description CSVs (<dir>/<table>.csv with columns
/// original_column_name, column_description, value_description). A missing
/// directory yields empty descriptions; unknown columns are dropped with a warning.
SchemaDescriptions load_descriptions(const DatabaseCatalog& catalog, const std::filesystem::path& description_dir);

/// Builds descriptions from a pre-generated map (e.g. LLM output). Keys not in
/// the catalog are dropped with a warning.
SchemaDescriptions descriptions_from_map(
    const DatabaseCatalog& catalog,
    const std::map<std::pair<std::string, std::string>, std::string>& column_texts,
    const std::map<std::string, std::string>& table_texts = {});

struct RenderOptions {
    bool include_samples = true;
    bool include_descriptions = true;
};

/// Deterministic prompt-facing text: tables, columns (restricted to `subset`
/// when given), foreign keys among retained tables, value samples restricted
/// to retained columns, and per-column descriptions when provided.
std::string render_schema_prompt(const DatabaseCatalog& catalog, const ValueSamples& samples,
                                 const SchemaDescriptions* descriptions = nullptr,
                                 const SchemaSet* subset = nullptr, const RenderOptions& options = {});

/// Value-sample rows alone, one block per table with rows.
std::string render_samples_block(const DatabaseCatalog& catalog, const ValueSamples& samples,
                                 const SchemaSet* subset = nullptr);

/// "table.column: description" lines alone.
std::string render_descriptions_block(const DatabaseCatalog& catalog, const SchemaDescriptions& descriptions,
                                      const SchemaSet* subset = nullptr);

}  // namespace sqlink
