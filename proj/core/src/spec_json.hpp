#pragma once

#include <json.hpp>

#include "tabletop/network.hpp"

namespace tabletop::detail {

nlohmann::json spec_to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const nlohmann::json& j);

}  // namespace tabletop::detail
