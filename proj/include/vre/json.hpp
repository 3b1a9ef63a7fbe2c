#pragma once

#include <json.hpp>

namespace vre {
using json = nlohmann::json;
}
