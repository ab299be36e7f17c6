#pragma once

#include <optional>
#include <string>

#include "json.hpp"

namespace sqlink::detail {

/// First parseable JSON object or array embedded in free text. Tolerates
/// surrounding prose and markdown fences; strings with brackets are skipped
/// correctly.
inline std::optional<nlohmann::json> locate_json_payload(const std::string& text) {
    for (std::size_t start = 0; start < text.size(); ++start) {
        char open = text[start];
        if (open != '{' && open != '[') continue;
        char close = open == '{' ? '}' : ']';
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (c == '\\') {
                    ++i;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == open) {
                ++depth;
            } else if (c == close) {
                if (--depth == 0) {
                    nlohmann::json parsed = nlohmann::json::parse(text.substr(start, i - start + 1), nullptr, false);
                    if (!parsed.is_discarded()) return parsed;
                    break;  // malformed candidate, resume scanning
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace sqlink::detail
