#pragma once

// nlohmann/json bindings shared by the core translation units. Not installed.

#include <json.hpp>

#include "conjoint/design.hpp"
#include "conjoint/error.hpp"

namespace conjoint::detail {

using Json = nlohmann::json;

Json design_to_json(const Design& design);
Design design_from_json(const Json& j);

// Reads a required field, translating nlohmann exceptions into conjoint errors.
template <typename T>
T required(const Json& j, const char* key, ErrorCode code, const std::string& context) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    throw Error(code, context + ": missing field '" + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(code, context + ": bad field '" + key + "': " + e.what());
  }
}

}  // namespace conjoint::detail
