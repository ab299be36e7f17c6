#include "sqlink/llm_gateway.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json_locate.hpp"
#include "sqlink/errors.hpp"

namespace sqlink {

using nlohmann::json;

const char* role_name(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

const char* backend_kind_name(BackendKind kind) {
    switch (kind) {
        case BackendKind::Http: return "http";
        case BackendKind::Replay: return "replay";
        case BackendKind::Scripted: return "scripted";
    }
    return "http";
}

std::string canonical_request_json(const ChatRequest& request) {
    json messages = json::array();
    for (const ChatMessage& m : request.messages) {
        messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    // nlohmann objects keep keys sorted, so dump() is canonical
    json canonical = {
        {"model", request.model},
        {"temperature", request.temperature},
        {"messages", std::move(messages)},
    };
    return canonical.dump();
}

std::string request_fingerprint(const ChatRequest& request) {
    std::string canonical = canonical_request_json(request);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    EVP_Digest(canonical.data(), canonical.size(), digest, &digest_len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

// ---- HTTP backend ----

namespace {

// "http://host:port/v1" -> ("http://host:port", "/v1")
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    std::size_t scheme = base_url.find("://");
    std::size_t path_start = scheme == std::string::npos ? base_url.find('/') : base_url.find('/', scheme + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string path = base_url.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {base_url.substr(0, path_start), path};
}

bool transient_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {}

ChatResponse HttpBackend::complete(const ChatRequest& request) {
    json messages = json::array();
    for (const ChatMessage& m : request.messages) {
        messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    json payload = {
        {"model", request.model},
        {"messages", std::move(messages)},
        {"temperature", request.temperature},
    };
    if (request.max_tokens > 0) payload["max_tokens"] = request.max_tokens;
    std::string body = payload.dump();

    auto [host, prefix] = split_base_url(config_.base_url);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(config_.initial_backoff * (1LL << (attempt - 1)));
        }
        httplib::Client client(host);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.request_timeout));
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.request_timeout));

        auto res = client.Post(prefix + "/chat/completions", headers, body, "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            throw Error(ErrorCode::AuthError, "endpoint returned HTTP " + std::to_string(res->status));
        }
        if (transient_status(res->status)) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw Error(ErrorCode::TransportError,
                        "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
        }
        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
            throw Error(ErrorCode::TransportError, "malformed chat-completions payload");
        }
        ChatResponse out;
        const json& choice = reply["choices"][0];
        if (choice.contains("message") && choice["message"].contains("content") &&
            choice["message"]["content"].is_string()) {
            out.content = choice["message"]["content"].get<std::string>();
        }
        if (reply.contains("usage")) {
            out.prompt_tokens = reply["usage"].value("prompt_tokens", 0LL);
            out.completion_tokens = reply["usage"].value("completion_tokens", 0LL);
        }
        out.backend = BackendKind::Http;
        return out;
    }
    throw Error(ErrorCode::TransportError,
                "request failed after " + std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
}

// ---- replay cache ----

std::shared_ptr<ReplayCache> ReplayCache::load(const std::filesystem::path& path) {
    auto cache = std::make_shared<ReplayCache>();
    cache->append_path_ = path;
    std::ifstream in(path);
    if (!in) return cache;  // nothing recorded yet
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.contains("fingerprint") || !record.contains("response")) {
            throw Error(ErrorCode::ReplayMiss,
                        path.string() + ":" + std::to_string(line_no) + " is not a replay record");
        }
        Entry entry;
        entry.canonical_request = record.value("request", "");
        const json& resp = record["response"];
        entry.response.content = resp.value("content", "");
        entry.response.prompt_tokens = resp.value("prompt_tokens", 0LL);
        entry.response.completion_tokens = resp.value("completion_tokens", 0LL);
        entry.response.backend = BackendKind::Replay;
        cache->entries_[record["fingerprint"].get<std::string>()] = std::move(entry);
    }
    return cache;
}

std::optional<ChatResponse> ReplayCache::find(const std::string& fingerprint) const {
    auto it = entries_.find(fingerprint);
    if (it == entries_.end()) return std::nullopt;
    ChatResponse out = it->second.response;
    out.backend = BackendKind::Replay;
    return out;
}

void ReplayCache::insert(const std::string& fingerprint, const std::string& canonical_request,
                         const ChatResponse& response) {
    std::lock_guard<std::mutex> lock(write_mutex_);
    auto [it, inserted] = entries_.emplace(fingerprint, Entry{canonical_request, response});
    if (!inserted) return;  // already recorded
    if (append_path_.empty()) return;
    json record = {
        {"fingerprint", fingerprint},
        {"request", canonical_request},
        {"response",
         {{"content", response.content},
          {"prompt_tokens", response.prompt_tokens},
          {"completion_tokens", response.completion_tokens}}},
    };
    std::ofstream out(append_path_, std::ios::app);
    out << record.dump() << "\n";
}

long long ReplayCache::total_prompt_tokens() const {
    long long total = 0;
    for (const auto& [fp, entry] : entries_) total += entry.response.prompt_tokens;
    return total;
}

long long ReplayCache::total_completion_tokens() const {
    long long total = 0;
    for (const auto& [fp, entry] : entries_) total += entry.response.completion_tokens;
    return total;
}

ChatResponse ReplayBackend::complete(const ChatRequest& request) {
    std::string fingerprint = request_fingerprint(request);
    if (auto hit = cache_->find(fingerprint)) {
        return *hit;
    }
    throw Error(ErrorCode::ReplayMiss, "no recorded response for " + request.request_tag + " (" +
                                           fingerprint.substr(0, 12) + "...)");
}

// ---- gateway ----

LlmGateway::LlmGateway(std::unique_ptr<LlmBackend> backend) : backend_(std::move(backend)) {}

ChatResponse LlmGateway::chat(const ChatRequest& request) {
    ChatResponse response = backend_->complete(request);
    prompt_tokens_.fetch_add(response.prompt_tokens);
    completion_tokens_.fetch_add(response.completion_tokens);
    requests_.fetch_add(1);
    if (record_cache_ != nullptr) {
        record_cache_->insert(request_fingerprint(request), canonical_request_json(request), response);
    }
    return response;
}

// ---- reply parsing ----

namespace {

std::string trim_copy(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string strip_trailing_semicolons(std::string sql) {
    while (!sql.empty() && (sql.back() == ';' || std::isspace(static_cast<unsigned char>(sql.back())))) {
        sql.pop_back();
    }
    return sql;
}

bool starts_with_select_or_with(std::string_view text) {
    std::size_t i = text.find_first_not_of(" \t\r\n");
    if (i == std::string::npos) return false;
    auto word_is = [&](std::string_view word) {
        if (text.size() - i < word.size()) return false;
        for (std::size_t k = 0; k < word.size(); ++k) {
            if (std::tolower(static_cast<unsigned char>(text[i + k])) != word[k]) return false;
        }
        std::size_t end = i + word.size();
        return end == text.size() || !std::isalnum(static_cast<unsigned char>(text[end]));
    };
    return word_is("select") || word_is("with");
}

std::size_t find_word_ci(std::string_view text, std::string_view word, std::size_t from = 0) {
    for (std::size_t i = from; i + word.size() <= text.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < word.size(); ++k) {
            if (std::tolower(static_cast<unsigned char>(text[i + k])) != word[k]) {
                match = false;
                break;
            }
        }
        if (!match) continue;
        bool left_ok = i == 0 || !(std::isalnum(static_cast<unsigned char>(text[i - 1])) || text[i - 1] == '_');
        std::size_t end = i + word.size();
        bool right_ok = end == text.size() || !(std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_');
        if (left_ok && right_ok) return i;
    }
    return std::string::npos;
}

std::string strip_fence_tail(std::string text) {
    std::size_t fence = text.find("```");
    if (fence != std::string::npos) text.resize(fence);
    return text;
}

}  // namespace

std::string extract_sql(const std::string& reply) {
    // fenced code blocks first
    std::size_t pos = 0;
    while ((pos = reply.find("```", pos)) != std::string::npos) {
        std::size_t content_start = reply.find('\n', pos + 3);
        if (content_start == std::string::npos) break;
        std::size_t fence_end = reply.find("```", content_start);
        std::string block = reply.substr(content_start + 1,
                                         fence_end == std::string::npos ? std::string::npos
                                                                        : fence_end - content_start - 1);
        if (starts_with_select_or_with(block)) {
            return strip_trailing_semicolons(trim_copy(block));
        }
        if (fence_end == std::string::npos) break;
        pos = fence_end + 3;
    }

    // "SQL:" prefixed section
    std::size_t sql_label = 0;
    while ((sql_label = find_word_ci(reply, "sql", sql_label)) != std::string::npos) {
        std::size_t colon = sql_label + 3;
        if (colon < reply.size() && reply[colon] == ':') {
            std::string tail = reply.substr(colon + 1);
            std::size_t start = tail.find_first_not_of(" \t\r\n`");
            if (start != std::string::npos && starts_with_select_or_with(tail.substr(start))) {
                return strip_trailing_semicolons(trim_copy(strip_fence_tail(tail.substr(start))));
            }
        }
        sql_label += 3;
    }

    // longest tail starting at SELECT (preferred) or a WITH that opens a CTE
    std::size_t select_pos = find_word_ci(reply, "select");
    if (select_pos != std::string::npos) {
        return strip_trailing_semicolons(trim_copy(strip_fence_tail(reply.substr(select_pos))));
    }
    std::size_t with_pos = 0;
    while ((with_pos = find_word_ci(reply, "with", with_pos)) != std::string::npos) {
        std::string_view tail(reply.data() + with_pos, reply.size() - with_pos);
        if (tail.find('(') != std::string_view::npos && find_word_ci(tail, "as") != std::string::npos) {
            return strip_trailing_semicolons(trim_copy(strip_fence_tail(std::string(tail))));
        }
        with_pos += 4;
    }

    throw Error(ErrorCode::NoSqlFound, "reply contains no SQL statement");
}

std::optional<json> locate_json(const std::string& reply) {
    return detail::locate_json_payload(reply);
}

StructuredReply extract_structured(const std::string& reply, const std::vector<std::string>& expected_fields) {
    auto payload = detail::locate_json_payload(reply);
    if (!payload.has_value()) {
        throw Error(ErrorCode::NoStructureFound, "reply contains no JSON payload");
    }

    StructuredReply out;
    auto lower = [](std::string s) {
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };

    std::map<std::string, const json*> by_key;
    if (payload->is_object()) {
        for (auto it = payload->begin(); it != payload->end(); ++it) {
            by_key[lower(it.key())] = &it.value();
        }
    }

    for (const std::string& field : expected_fields) {
        std::vector<std::string>& values = out.fields[field];
        auto it = by_key.find(lower(field));
        if (it == by_key.end()) {
            out.missing.push_back(field);
            continue;
        }
        const json& value = *it->second;
        if (value.is_string()) {
            values.push_back(value.get<std::string>());
        } else if (value.is_array()) {
            for (const auto& item : value) {
                values.push_back(item.is_string() ? item.get<std::string>() : item.dump());
            }
        } else if (!value.is_null()) {
            values.push_back(value.dump());
        }
    }
    return out;
}

}  // namespace sqlink
