#pragma once

#include <string>

#include <json.hpp>

namespace geomine {

/// Compact JSON with fixed numeric precision so output is byte-stable:
/// floats under a "coordinates" member or named "lat"/"lon" get 8 decimals,
/// floats in members whose name ends in "_s" are rounded to whole seconds,
/// all other floats get 3 decimals. Integers print as integers, non-finite
/// floats as null. Member order is preserved.
std::string dump_stable(const nlohmann::ordered_json& doc);

} // namespace geomine
