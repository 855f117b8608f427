#include "qgdetect/config.hpp"
#include "qgdetect/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace qgd {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& origin, const std::string& section,
                            const std::string& key, const std::string& what) {
    std::string where = section.empty() ? key : "[" + section + "] " + key;
    throw parse_error(origin + ": " + what + " for key '" + where + "'");
}

} // namespace

ConfigFile ConfigFile::parse_string(std::string_view text, const std::string& origin) {
    ConfigFile cf;
    cf.origin = origin;
    cf.sections[""];

    std::string section;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view raw = (nl == std::string_view::npos)
                                   ? text.substr(pos)
                                   : text.substr(pos, nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++lineno;

        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw parse_error(origin + ":" + std::to_string(lineno) +
                                  ": malformed section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty())
                throw parse_error(origin + ":" + std::to_string(lineno) +
                                  ": empty section name");
            cf.sections[section];
            continue;
        }

        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw parse_error(origin + ":" + std::to_string(lineno) +
                              ": expected key=value");
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty())
            throw parse_error(origin + ":" + std::to_string(lineno) + ": empty key");
        auto [it, inserted] = cf.sections[section].emplace(key, value);
        (void)it;
        if (!inserted)
            throw parse_error(origin + ":" + std::to_string(lineno) +
                              ": duplicate key '" + key + "'");
    }
    return cf;
}

ConfigFile ConfigFile::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path.string());
}

bool ConfigFile::has_section(const std::string& section) const {
    return sections.count(section) != 0;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    return it != sections.end() && it->second.count(key) != 0;
}

std::vector<std::string> ConfigFile::keys(const std::string& section) const {
    std::vector<std::string> out;
    auto it = sections.find(section);
    if (it == sections.end()) return out;
    out.reserve(it->second.size());
    for (const auto& [k, v] : it->second) out.push_back(k);
    return out;
}

const std::string& ConfigFile::get(const std::string& section,
                                   const std::string& key) const {
    auto sit = sections.find(section);
    if (sit != sections.end()) {
        auto kit = sit->second.find(key);
        if (kit != sit->second.end()) return kit->second;
    }
    std::string where = section.empty() ? key : "[" + section + "] " + key;
    throw parse_error(origin + ": missing required key '" + where + "'");
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

long long ConfigFile::get_int(const std::string& section, const std::string& key) const {
    const std::string& v = get(section, key);
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        bad_value(origin, section, key, "expected integer, got '" + v + "'");
    return out;
}

long long ConfigFile::get_int_or(const std::string& section, const std::string& key,
                                 long long fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
    const std::string& v = get(section, key);
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        bad_value(origin, section, key, "expected number, got '" + v + "'");
    return out;
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key,
                                 double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

std::uint64_t ConfigFile::get_u64_or(const std::string& section, const std::string& key,
                                     std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& v = get(section, key);
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        bad_value(origin, section, key, "expected unsigned integer, got '" + v + "'");
    return out;
}

std::vector<std::string> ConfigFile::get_list(const std::string& section,
                                              const std::string& key) const {
    const std::string& v = get(section, key);
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        std::size_t comma = v.find(',', pos);
        std::string item = trim(std::string_view(v).substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty())
        bad_value(origin, section, key, "expected non-empty list");
    return out;
}

std::vector<long long> ConfigFile::get_int_list(const std::string& section,
                                                const std::string& key) const {
    std::vector<long long> out;
    for (const std::string& item : get_list(section, key)) {
        long long x = 0;
        auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
        if (ec != std::errc() || p != item.data() + item.size())
            bad_value(origin, section, key, "expected integer list item, got '" + item + "'");
        out.push_back(x);
    }
    return out;
}

void ConfigFile::check_known_keys(const std::string& section,
                                  std::span<const std::string_view> allowed) const {
    auto sit = sections.find(section);
    if (sit == sections.end()) return;
    for (const auto& [k, v] : sit->second) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
            std::string where = section.empty() ? "top level" : "[" + section + "]";
            throw parse_error(origin + ": unknown key '" + k + "' in " + where);
        }
    }
}

} // namespace qgd
