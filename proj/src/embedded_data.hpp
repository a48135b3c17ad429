#pragma once

namespace cueaudit::embedded {

extern const char* const kUnitsJson;
extern const char* const kDirectionalRulesJson;
extern const char* const kTemplatesJson;
extern const char* const kAttributesJson;

}  // namespace cueaudit::embedded
