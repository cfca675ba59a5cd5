#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace proswitch {

// `key = value` lines; `#` starts a comment line; blank lines ignored.
std::map<std::string, std::string> parse_key_value(std::string_view contents);
std::map<std::string, std::string> load_key_value(const std::filesystem::path& path);

}  // namespace proswitch
