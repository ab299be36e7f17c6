#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sqlink {

enum class Role { System, User, Assistant };

const char* role_name(Role role);

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    std::string model;
    double temperature = 0.0;
    int max_tokens = 0;          // 0 = endpoint default
    std::string request_tag;     // pipeline step name, excluded from the fingerprint
};

enum class BackendKind { Http, Replay, Scripted };

const char* backend_kind_name(BackendKind kind);

struct ChatResponse {
    std::string content;
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
    BackendKind backend = BackendKind::Http;
};

/// Canonical serialization of the fingerprinted fields (model, temperature,
/// messages). Equal requests serialize identically; any message edit changes it.
std::string canonical_request_json(const ChatRequest& request);

/// SHA-256 hex over the canonical form.
std::string request_fingerprint(const ChatRequest& request);

class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    virtual BackendKind kind() const = 0;
};

struct HttpBackendConfig {
    std::string base_url = "http://127.0.0.1:8000/v1";  // OpenAI-compatible root
    std::string api_key;                                // empty = no Authorization header
    int max_retries = 5;
    std::chrono::milliseconds initial_backoff{250};
    std::chrono::milliseconds request_timeout{120000};
};

/// POSTs to <base_url>/chat/completions with exponential backoff on transient
/// failures. Throws Error{TransportError} after max_retries, Error{AuthError}
/// on 401/403.
class HttpBackend : public LlmBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    ChatResponse complete(const ChatRequest& request) override;
    BackendKind kind() const override { return BackendKind::Http; }

private:
    HttpBackendConfig config_;
};

/// Append-only fixture store: one JSON record per line with the fingerprint,
/// the canonical request, and the response. Human-auditable and diff-friendly.
class ReplayCache {
public:
    ReplayCache() = default;
    static std::shared_ptr<ReplayCache> load(const std::filesystem::path& path);  // missing file = empty cache

    std::optional<ChatResponse> find(const std::string& fingerprint) const;
    void insert(const std::string& fingerprint, const std::string& canonical_request,
                const ChatResponse& response);
    std::size_t size() const { return entries_.size(); }
    long long total_prompt_tokens() const;
    long long total_completion_tokens() const;

    void set_append_path(const std::filesystem::path& path) { append_path_ = path; }

private:
    struct Entry {
        std::string canonical_request;
        ChatResponse response;
    };
    std::map<std::string, Entry> entries_;
    std::filesystem::path append_path_;
    mutable std::mutex write_mutex_;
};

class ReplayBackend : public LlmBackend {
public:
    explicit ReplayBackend(std::shared_ptr<ReplayCache> cache) : cache_(std::move(cache)) {}
    ChatResponse complete(const ChatRequest& request) override;  // Error{ReplayMiss} on absence
    BackendKind kind() const override { return BackendKind::Replay; }

private:
    std::shared_ptr<ReplayCache> cache_;
};

/// Uniform chat surface: forwards to the configured backend, optionally
/// records every response into a replay cache, and accumulates token totals.
/// Safe for concurrent in-flight requests.
class LlmGateway {
public:
    explicit LlmGateway(std::unique_ptr<LlmBackend> backend);

    ChatResponse chat(const ChatRequest& request);

    /// Record every completed response into `cache` (which appends to its path).
    void record_into(std::shared_ptr<ReplayCache> cache) { record_cache_ = std::move(cache); }

    long long total_prompt_tokens() const { return prompt_tokens_.load(); }
    long long total_completion_tokens() const { return completion_tokens_.load(); }
    long long request_count() const { return requests_.load(); }
    BackendKind backend_kind() const { return backend_->kind(); }

private:
    std::unique_ptr<LlmBackend> backend_;
    std::shared_ptr<ReplayCache> record_cache_;
    std::atomic<long long> prompt_tokens_{0};
    std::atomic<long long> completion_tokens_{0};
    std::atomic<long long> requests_{0};
};

/// Pulls the SQL statement out of a model reply: fenced code block first, then
/// a "SQL:" line, then the longest tail starting at SELECT/WITH. Trailing
/// semicolons are trimmed. Throws Error{NoSqlFound}.
std::string extract_sql(const std::string& reply);

/// First JSON object or array embedded in the reply, tolerating surrounding
/// prose and code fences.
std::optional<nlohmann::json> locate_json(const std::string& reply);

struct StructuredReply {
    std::map<std::string, std::vector<std::string>> fields;
    std::vector<std::string> missing;  // expected fields absent from the payload
    bool degraded() const { return !missing.empty(); }
};

/// Parses the reply's JSON payload into string lists per expected field.
/// Missing fields come back as empty lists and are flagged. Throws
/// Error{NoStructureFound} when no JSON is present at all.
StructuredReply extract_structured(const std::string& reply, const std::vector<std::string>& expected_fields);

}  // namespace sqlink
