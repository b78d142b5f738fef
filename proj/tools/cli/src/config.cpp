#include "strider_cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace strider::cli {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string normalize_key(const std::string& key) {
    std::string out;
    out.reserve(key.size());
    for (char c : key) out.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

std::vector<ConfigEntry> parse_config_text(const std::string& text, const std::string& source) {
    std::vector<ConfigEntry> entries;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s.front() == '#') continue;
        const auto eq = s.find('=');
        const std::string where = source + ":" + std::to_string(line);
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value', got '" + s + "'");
        ConfigEntry e;
        e.key = normalize_key(trim(s.substr(0, eq)));
        e.value = trim(s.substr(eq + 1));
        e.line = line;
        if (e.key.empty()) throw ConfigError(where + ": missing key");
        if (e.value.size() >= 2 && e.value.front() == '"' && e.value.back() == '"') e.value = e.value.substr(1, e.value.size() - 2);
        if (!seen.insert(e.key).second) throw ConfigError(where + ": key '" + e.key + "' given twice");
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<ConfigEntry> load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), path.string());
}

}  // namespace strider::cli
