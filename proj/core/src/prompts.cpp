#include "sqlink/prompts.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "prompts_data.hpp"
#include "sqlink/errors.hpp"

namespace sqlink {

PromptLibrary PromptLibrary::builtin() {
    PromptLibrary lib;
    for (std::size_t i = 0; i < detail::kBuiltinTemplateCount; ++i) {
        lib.templates_[detail::kBuiltinTemplates[i].name] = detail::kBuiltinTemplates[i].text;
    }
    return lib;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    PromptLibrary lib = builtin();
    if (!std::filesystem::exists(dir)) {
        throw Error(ErrorCode::BadConfig, "prompt directory not found: " + dir.string());
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".tmpl") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream buffer;
        buffer << in.rdbuf();
        lib.templates_[entry.path().stem().string()] = buffer.str();
    }
    return lib;
}

const std::string& PromptLibrary::get(std::string_view name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) {
        throw Error(ErrorCode::UnknownTemplate, std::string(name));
    }
    return it->second;
}

bool PromptLibrary::has(std::string_view name) const {
    return templates_.find(name) != templates_.end();
}

std::string render_template(const std::string& text, const std::map<std::string, std::string>& slots) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c != '{') {
            out.push_back(c);
            ++i;
            continue;
        }
        std::size_t close = text.find('}', i + 1);
        bool replaced = false;
        if (close != std::string::npos) {
            std::string name = text.substr(i + 1, close - i - 1);
            bool word = !name.empty();
            for (char nc : name) {
                if (!(std::isalnum(static_cast<unsigned char>(nc)) || nc == '_')) {
                    word = false;
                    break;
                }
            }
            if (word) {
                auto it = slots.find(name);
                if (it != slots.end()) {
                    out += it->second;
                    i = close + 1;
                    replaced = true;
                }
            }
        }
        if (!replaced) {  // not a known slot: keep the brace verbatim
            out.push_back(c);
            ++i;
        }
    }
    return out;
}

}  // namespace sqlink
