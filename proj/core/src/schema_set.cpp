#include "sqlink/schema_set.hpp"

#include <algorithm>
#include <cctype>

namespace sqlink {

std::string canonical_identifier(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

void SchemaSet::add_column(std::string_view table, std::string_view column) {
    std::string t = canonical_identifier(table);
    columns_.emplace(t, canonical_identifier(column));
    tables_.insert(std::move(t));
}

void SchemaSet::add_table(std::string_view table) {
    tables_.insert(canonical_identifier(table));
}

void SchemaSet::merge(const SchemaSet& other) {
    columns_.insert(other.columns_.begin(), other.columns_.end());
    tables_.insert(other.tables_.begin(), other.tables_.end());
}

bool SchemaSet::contains_column(std::string_view table, std::string_view column) const {
    return columns_.count({canonical_identifier(table), canonical_identifier(column)}) > 0;
}

bool SchemaSet::contains_table(std::string_view table) const {
    return tables_.count(canonical_identifier(table)) > 0;
}

bool SchemaSet::covers_columns_of(const SchemaSet& other) const {
    return std::includes(columns_.begin(), columns_.end(), other.columns_.begin(), other.columns_.end());
}

std::vector<std::string> SchemaSet::qualified_names() const {
    std::vector<std::string> out;
    out.reserve(tables_.size() + columns_.size());
    for (const auto& t : tables_) out.push_back(t);
    for (const auto& [t, c] : columns_) out.push_back(t + "." + c);
    return out;
}

SchemaSet set_union(const SchemaSet& a, const SchemaSet& b) {
    SchemaSet out = a;
    out.merge(b);
    return out;
}

SchemaSet set_intersection_columns(const SchemaSet& a, const SchemaSet& b) {
    SchemaSet out;
    std::set_intersection(a.columns_.begin(), a.columns_.end(), b.columns_.begin(), b.columns_.end(),
                          std::inserter(out.columns_, out.columns_.end()));
    for (const auto& [t, c] : out.columns_) out.tables_.insert(t);
    return out;
}

}  // namespace sqlink
