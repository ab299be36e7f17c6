#pragma once

#include <cstddef>

namespace sqlink::detail {

struct BuiltinTemplate {
    const char* name;
    const char* text;
};

extern const BuiltinTemplate kBuiltinTemplates[];
extern const std::size_t kBuiltinTemplateCount;

}  // namespace sqlink::detail
