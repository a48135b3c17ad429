#include "cueaudit/defaults.hpp"

#include "embedded_data.hpp"

namespace cueaudit {

const std::map<std::string, AttributeSpec>& builtin_attribute_specs() {
  static const auto specs = attribute_specs_from_json(nlohmann::json::parse(embedded::kAttributesJson));
  return specs;
}

const TemplateRegistry& builtin_templates() {
  static const auto registry = TemplateRegistry::from_json(nlohmann::json::parse(embedded::kTemplatesJson));
  return registry;
}

}  // namespace cueaudit
