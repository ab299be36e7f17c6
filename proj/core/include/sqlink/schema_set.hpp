#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sqlink {

std::string canonical_identifier(std::string_view name);

/// A set of qualified (table, column) pairs plus the tables they imply.
/// All names are canonicalized (lowercased) on insertion; the catalog keeps
/// the original casing for rendering. Tables referenced without any column
/// (e.g. SELECT COUNT(*) FROM t) are tracked alongside the column-implied ones.
class SchemaSet {
public:
    using Column = std::pair<std::string, std::string>;  // (table, column), canonical

    void add_column(std::string_view table, std::string_view column);
    void add_table(std::string_view table);
    void merge(const SchemaSet& other);

    bool contains_column(std::string_view table, std::string_view column) const;
    bool contains_table(std::string_view table) const;
    bool covers_columns_of(const SchemaSet& other) const;

    const std::set<Column>& columns() const { return columns_; }
    const std::set<std::string>& tables() const { return tables_; }
    std::size_t column_count() const { return columns_.size(); }
    std::size_t table_count() const { return tables_.size(); }
    bool empty() const { return columns_.empty() && tables_.empty(); }

    std::vector<std::string> qualified_names() const;  // "t" and "t.c", sorted

    friend SchemaSet set_union(const SchemaSet& a, const SchemaSet& b);
    friend SchemaSet set_intersection_columns(const SchemaSet& a, const SchemaSet& b);
    friend bool operator==(const SchemaSet& a, const SchemaSet& b) = default;

private:
    std::set<Column> columns_;
    std::set<std::string> tables_;
};

SchemaSet set_union(const SchemaSet& a, const SchemaSet& b);
SchemaSet set_intersection_columns(const SchemaSet& a, const SchemaSet& b);

}  // namespace sqlink
