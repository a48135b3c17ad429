#pragma once

#include <map>
#include <string>

#include "cueaudit/catalog.hpp"
#include "cueaudit/prompting.hpp"

namespace cueaudit {

/// The ten bundled datasets' attribute specs and prompt templates.
const std::map<std::string, AttributeSpec>& builtin_attribute_specs();
const TemplateRegistry& builtin_templates();

}  // namespace cueaudit
