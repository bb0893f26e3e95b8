#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gaitvibe/fusion.hpp"

namespace gaitvibe
{

inline constexpr int kProfileFormatVersion = 1;

nlohmann::json profile_to_json(const CalibrationProfile& profile);
// Throws InputError on a missing field, wrong type or unsupported format_version.
CalibrationProfile profile_from_json(const nlohmann::json& doc);

std::string dump_profile(const CalibrationProfile& profile);
void save_profile(const std::filesystem::path& path, const CalibrationProfile& profile);
CalibrationProfile load_profile(const std::filesystem::path& path);

} // namespace gaitvibe
