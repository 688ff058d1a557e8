#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace hydroloop::detail {

// Member `key` of object `j`; `path` names j in error messages ("plant").
const nlohmann::json& require(const nlohmann::json& j, const std::string& path, const std::string& key);
double require_number(const nlohmann::json& j, const std::string& path, const std::string& key);
double number_or(const nlohmann::json& j, const std::string& key, double fallback);

// Parse a JSON document, reporting syntax errors with their line number.
nlohmann::json parse_json(const std::string& text, const std::string& origin);
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Two-space indented, keys sorted, trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace hydroloop::detail
