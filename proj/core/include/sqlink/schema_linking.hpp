#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sqlink/schema_catalog.hpp"
#include "sqlink/schema_set.hpp"
#include "sqlink/sql_analysis.hpp"

namespace sqlink {

/// Forward links, backward links, and their merge.
struct LinkedSchema {
    SchemaSet forward;
    SchemaSet backward;
    SchemaSet merged;

    static LinkedSchema combine(SchemaSet forward, SchemaSet backward) {
        LinkedSchema out;
        out.merged = set_union(forward, backward);
        out.forward = std::move(forward);
        out.backward = std::move(backward);
        return out;
    }
};

/// Catalog, samples and descriptions restricted to the linked elements.
struct SimplifiedCatalog {
    DatabaseCatalog catalog;
    ValueSamples samples;
    SchemaDescriptions descriptions;
};

struct RecallStats {
    double nsr = 0.0;  // fraction in [0, 1]
    double srr = 0.0;  // fraction in [0, 1]
    double avg_tables = 0.0;
    double avg_columns = 0.0;
    int n_questions = 0;
};

/// Extracts table / table.column mentions from a forward-linking reply.
/// Structured (JSON) payloads are preferred; dotted identifiers in prose are
/// the fallback. Elements absent from the catalog are dropped and counted.
/// Throws Error{EmptyLink} when nothing valid is extracted.
SchemaSet parse_forward_response(const std::string& reply, const DatabaseCatalog& catalog,
                                 int* dropped = nullptr);

/// Adds every catalog column whose name occurs as a token in the evidence.
SchemaSet augment_with_evidence(const SchemaSet& set, const std::string& evidence,
                                const DatabaseCatalog& catalog);

enum class BackwardStrategy { NameMatch, Ast };

/// Schema elements referenced by the preliminary SQL. The default strategy is
/// name matching; AST extraction is the precise alternative (falls back to
/// name matching when the SQL does not parse).
SchemaSet backward_link(const std::string& sql1, const DatabaseCatalog& catalog,
                        BackwardStrategy strategy = BackwardStrategy::NameMatch);

struct SimplifyOptions {
    bool retain_keys = false;  // also keep primary-key and FK-endpoint columns
};

/// Restricts catalog, samples and descriptions to the linked set. Tables with
/// no linked element are dropped; declaration order is preserved; the FK list
/// keeps only edges between retained tables. Throws Error{EmptyLink} when the
/// result would be empty.
SimplifiedCatalog simplify_schema(const DatabaseCatalog& catalog, const ValueSamples& samples,
                                  const SchemaDescriptions& descriptions, const SchemaSet& linked,
                                  const SimplifyOptions& options = {});

/// Ground-truth schema elements of a gold query, via AST extraction.
/// Star-only references contribute the table but no columns.
SchemaSet gold_schema(const std::string& gold_sql, const DatabaseCatalog& catalog);

/// Non-strict recall over column elements: sum of per-question intersection
/// sizes over the sum of gold-set sizes.
double compute_nsr(std::span<const SchemaSet> linked, std::span<const SchemaSet> gold);

/// Strict recall rate: fraction of questions whose linked set covers the
/// entire gold column set.
double compute_srr(std::span<const SchemaSet> linked, std::span<const SchemaSet> gold);

/// Mean table count and mean column count per question.
std::pair<double, double> schema_size_stats(std::span<const SchemaSet> linked);

RecallStats compute_recall_stats(std::span<const SchemaSet> linked, std::span<const SchemaSet> gold);

}  // namespace sqlink
