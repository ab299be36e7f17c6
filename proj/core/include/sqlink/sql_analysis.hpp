#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sqlink/schema_catalog.hpp"
#include "sqlink/schema_set.hpp"

namespace sqlink {

enum class ExecStatus { Ok, Error, Timeout };

const char* exec_status_name(ExecStatus status);

/// Result of executing one read-only statement. Cells are canonical strings:
/// NULL becomes a sentinel, floats are rounded to 1e-6 with a repeatable
/// rendering, and integral floats collapse to integer form so that INTEGER
/// and REAL columns compare equal the way the public BIRD evaluator does.
struct ExecutionOutcome {
    ExecStatus status = ExecStatus::Error;
    std::vector<std::vector<std::string>> rows;  // captured rows, capped at max_rows
    long long row_count = 0;                     // true count, even when capped
    int column_count = 0;
    std::string error_message;
    std::chrono::microseconds elapsed{0};
    bool rows_truncated = false;
};

inline constexpr const char* kNullCell = "<NULL>";

struct ExecOptions {
    std::chrono::milliseconds timeout{30000};
    long long max_rows = 10000;
};

/// Executes against the SQLite file read-only. Statements whose first keyword
/// is not SELECT or WITH are rejected. Failures are reported in the outcome,
/// never thrown.
ExecutionOutcome execute_sql(const std::filesystem::path& db_path, std::string_view sql,
                             const ExecOptions& options = {});

enum class RiskLevel { Low, High };

/// High iff the query failed, timed out, or returned zero rows.
RiskLevel classify_risk(const ExecutionOutcome& outcome);

/// Execution-accuracy cell comparison: pred matches gold iff both executed and
/// their sets of row tuples are equal (row order ignored, cell order kept).
bool results_match(const ExecutionOutcome& pred, const ExecutionOutcome& gold);

struct AstExtractOptions {
    bool expand_star = true;  // SELECT * pulls in every column of the selected tables
};

/// Precise AST route: parses the statement, resolves aliases and FROM-clause
/// scope, and returns exactly the catalog tables/columns the query references.
/// Throws Error{ParseError} on malformed SQL.
SchemaSet extract_columns_ast(std::string_view sql, const DatabaseCatalog& catalog,
                              const AstExtractOptions& options = {});

/// Robust token route: every catalog column whose name appears as an
/// identifier token is recalled for all owning tables; tables likewise.
/// Total on arbitrary bytes, never throws.
SchemaSet extract_columns_name_match(std::string_view sql, const DatabaseCatalog& catalog);

}  // namespace sqlink
