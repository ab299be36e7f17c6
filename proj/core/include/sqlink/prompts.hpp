#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace sqlink {

/// Named prompt templates with {slot} placeholders. Compiled-in defaults can
/// be overridden per template by files <dir>/<name>.tmpl.
class PromptLibrary {
public:
    static PromptLibrary builtin();
    static PromptLibrary load(const std::filesystem::path& dir);

    const std::string& get(std::string_view name) const;  // Error{UnknownTemplate}
    bool has(std::string_view name) const;

private:
    std::map<std::string, std::string, std::less<>> templates_;
};

/// Replaces {name} placeholders from `slots`; unknown placeholders are left
/// verbatim so SQL braces survive. Deterministic.
std::string render_template(const std::string& text, const std::map<std::string, std::string>& slots);

}  // namespace sqlink
