#pragma once

#include <sqlite3.h>

#include <string>
#include <string_view>

namespace sqlink::detail {

/// Thin RAII wrappers over the sqlite3 C API. One handle per worker; the
/// library only ever opens databases read-only.
class SqliteDb {
public:
    SqliteDb() = default;
    ~SqliteDb() { close(); }
    SqliteDb(const SqliteDb&) = delete;
    SqliteDb& operator=(const SqliteDb&) = delete;

    int open_readonly(const std::string& path) {
        close();
        return sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READONLY, nullptr);
    }

    void close() {
        if (db_ != nullptr) {
            sqlite3_close_v2(db_);
            db_ = nullptr;
        }
    }

    sqlite3* get() const { return db_; }
    std::string errmsg() const { return db_ ? sqlite3_errmsg(db_) : "no database handle"; }

private:
    sqlite3* db_ = nullptr;
};

class SqliteStmt {
public:
    SqliteStmt() = default;
    ~SqliteStmt() { finalize(); }
    SqliteStmt(const SqliteStmt&) = delete;
    SqliteStmt& operator=(const SqliteStmt&) = delete;

    int prepare(sqlite3* db, std::string_view sql, const char** tail = nullptr) {
        finalize();
        return sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &stmt_, tail);
    }

    void finalize() {
        if (stmt_ != nullptr) {
            sqlite3_finalize(stmt_);
            stmt_ = nullptr;
        }
    }

    int step() { return sqlite3_step(stmt_); }
    sqlite3_stmt* get() const { return stmt_; }

private:
    sqlite3_stmt* stmt_ = nullptr;
};

/// "name" -> "\"name\"" with embedded quotes doubled, for PRAGMA/SELECT use.
inline std::string quote_identifier(std::string_view name) {
    std::string out = "\"";
    for (char c : name) {
        out.push_back(c);
        if (c == '"') out.push_back('"');
    }
    out.push_back('"');
    return out;
}

}  // namespace sqlink::detail
