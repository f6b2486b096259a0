#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "roughlab/core.hpp"
#include "roughlab/regularity.hpp"

namespace roughlab::lab {

/// 17 significant digits, '.' decimal point, independent of locale.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Columns t, x, u; every `level_stride`-th stored level plus the last one.
void write_trajectory_csv(const std::filesystem::path& path, const SpaceTimeField& u, std::size_t level_stride = 1);
/// Columns r, z, D, mode with z written as "x|t"; one row per radius and center.
void write_deviation_csv(const std::filesystem::path& path, const DeviationProfile& profile);

/// Reads a t, x, u trajectory back; x must repeat the same uniform grid on
/// every level. The exterior is the constant zero callable.
SpaceTimeField read_trajectory_csv(const std::filesystem::path& path);

}  // namespace roughlab::lab
