#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace strider::cli {

/// Bad configuration: unknown key, malformed line, unreadable file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfigEntry {
    std::string key;  ///< normalized: lower case, '_' replaced by '-'
    std::string value;
    std::size_t line = 0;
};

/// Parses `key = value` lines. Blank lines and lines starting with '#' are
/// skipped; values may be wrapped in double quotes. A repeated key is an
/// error.
std::vector<ConfigEntry> parse_config_text(const std::string& text, const std::string& source = "<config>");
std::vector<ConfigEntry> load_config_file(const std::filesystem::path& path);

std::string normalize_key(const std::string& key);

}  // namespace strider::cli
