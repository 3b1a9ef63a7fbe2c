#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vre::util {

std::optional<std::string> read_file(const std::filesystem::path& path);
bool write_file(const std::filesystem::path& path, std::string_view data);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool starts_with(std::string_view s, std::string_view prefix);

/// Wall clock, milliseconds since the Unix epoch.
std::int64_t unix_millis();

/// Monotonic clock, milliseconds as a double (sub-ms resolution).
double steady_millis();

std::string format_double(double v, int decimals);

}  // namespace vre::util
