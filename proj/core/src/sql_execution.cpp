#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>

#include "sql_lexer.hpp"
#include "sqlink/sql_analysis.hpp"
#include "sqlite_util.hpp"

namespace sqlink {

namespace {

using detail::SqliteDb;
using detail::SqliteStmt;

std::string canonical_float(double v) {
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

std::string canonical_cell(sqlite3_stmt* stmt, int col) {
    switch (sqlite3_column_type(stmt, col)) {
        case SQLITE_NULL:
            return kNullCell;
        case SQLITE_INTEGER:
            return std::to_string(sqlite3_column_int64(stmt, col));
        case SQLITE_FLOAT:
            return canonical_float(sqlite3_column_double(stmt, col));
        case SQLITE_BLOB: {
            const auto* bytes = static_cast<const unsigned char*>(sqlite3_column_blob(stmt, col));
            int n = sqlite3_column_bytes(stmt, col);
            std::string out = "x'";
            static const char* hex = "0123456789ABCDEF";
            for (int i = 0; i < n; ++i) {
                out.push_back(hex[bytes[i] >> 4]);
                out.push_back(hex[bytes[i] & 0xF]);
            }
            out.push_back('\'');
            return out;
        }
        default: {
            const unsigned char* s = sqlite3_column_text(stmt, col);
            return s ? reinterpret_cast<const char*>(s) : "";
        }
    }
}

bool first_keyword_is_read_only(std::string_view sql) {
    auto tokens = detail::lex_sql(sql);
    if (tokens.empty() || tokens.front().kind != detail::TokenKind::Keyword) return false;
    const std::string& word = tokens.front().text;
    return word == "select" || word == "with";
}

struct Deadline {
    std::chrono::steady_clock::time_point at;
};

int progress_callback(void* ctx) {
    auto* deadline = static_cast<Deadline*>(ctx);
    return std::chrono::steady_clock::now() >= deadline->at ? 1 : 0;
}

}  // namespace

const char* exec_status_name(ExecStatus status) {
    switch (status) {
        case ExecStatus::Ok: return "ok";
        case ExecStatus::Error: return "error";
        case ExecStatus::Timeout: return "timeout";
    }
    return "error";
}

ExecutionOutcome execute_sql(const std::filesystem::path& db_path, std::string_view sql,
                             const ExecOptions& options) {
    ExecutionOutcome outcome;
    auto start = std::chrono::steady_clock::now();
    auto finish = [&](ExecutionOutcome& o) -> ExecutionOutcome& {
        o.elapsed = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
        return o;
    };

    if (!first_keyword_is_read_only(sql)) {
        outcome.error_message = "only SELECT/WITH statements are allowed";
        return finish(outcome);
    }

    SqliteDb db;
    if (db.open_readonly(db_path.string()) != SQLITE_OK) {
        outcome.error_message = "cannot open database: " + db.errmsg();
        return finish(outcome);
    }

    Deadline deadline{start + options.timeout};
    sqlite3_progress_handler(db.get(), 1000, progress_callback, &deadline);

    SqliteStmt stmt;
    const char* tail = nullptr;
    if (stmt.prepare(db.get(), sql, &tail) != SQLITE_OK) {
        outcome.error_message = db.errmsg();
        return finish(outcome);
    }
    if (tail != nullptr) {
        std::string_view rest(tail, sql.data() + sql.size() - tail);
        for (char c : rest) {
            if (!std::isspace(static_cast<unsigned char>(c)) && c != ';') {
                outcome.error_message = "multiple statements are not allowed";
                return finish(outcome);
            }
        }
    }

    outcome.column_count = sqlite3_column_count(stmt.get());
    int rc;
    while ((rc = stmt.step()) == SQLITE_ROW) {
        ++outcome.row_count;
        if (outcome.row_count <= options.max_rows) {
            std::vector<std::string> row;
            row.reserve(outcome.column_count);
            for (int i = 0; i < outcome.column_count; ++i) row.push_back(canonical_cell(stmt.get(), i));
            outcome.rows.push_back(std::move(row));
        } else {
            outcome.rows_truncated = true;
        }
    }
    if (rc != SQLITE_DONE) {
        bool timed_out = std::chrono::steady_clock::now() >= deadline.at &&
                         (rc == SQLITE_INTERRUPT || rc == SQLITE_ABORT);
        outcome.rows.clear();
        outcome.row_count = 0;
        outcome.column_count = 0;
        outcome.rows_truncated = false;
        if (timed_out) {
            outcome.status = ExecStatus::Timeout;
            outcome.error_message = "execution exceeded timeout";
        } else {
            outcome.error_message = db.errmsg();
        }
        return finish(outcome);
    }
    outcome.status = ExecStatus::Ok;
    return finish(outcome);
}

RiskLevel classify_risk(const ExecutionOutcome& outcome) {
    if (outcome.status != ExecStatus::Ok) return RiskLevel::High;
    return outcome.row_count == 0 ? RiskLevel::High : RiskLevel::Low;
}

bool results_match(const ExecutionOutcome& pred, const ExecutionOutcome& gold) {
    if (gold.status != ExecStatus::Ok) return false;
    if (pred.status != ExecStatus::Ok) return false;
    std::set<std::vector<std::string>> pred_rows(pred.rows.begin(), pred.rows.end());
    std::set<std::vector<std::string>> gold_rows(gold.rows.begin(), gold.rows.end());
    return pred_rows == gold_rows;
}

}  // namespace sqlink
