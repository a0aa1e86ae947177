#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "couplecheck/properties.hpp"

namespace couplecheck {

// Rationals are written as "num/den" strings so that JSON stays exact.
nlohmann::ordered_json to_json(const Report& r);
Report report_from_json(const nlohmann::ordered_json& j);

bool operator==(const InstanceReport& a, const InstanceReport& b);
bool operator==(const Report& a, const Report& b);

// Fixed field order; an empty list gives the header alone.
std::string format_report(const std::vector<Report>& results, bool json);

}  // namespace couplecheck
