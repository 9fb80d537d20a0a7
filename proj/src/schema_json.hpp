#pragma once

// Internal bridge between AttributeSchema and its JSON form, shared by the
// schema sidecar and the model file.

#include <json.hpp>

#include "oclep/dataset.hpp"

namespace oclep::detail {

nlohmann::json schema_to_json_value(const AttributeSchema& schema);
AttributeSchema schema_from_json_value(const nlohmann::json& j);

}  // namespace oclep::detail
