#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qgd {

// INI-style config: flat key=value pairs at the top, optional [section]
// blocks below. '#' starts a whole-line comment. Duplicate keys within a
// section are rejected rather than silently overwritten.
struct ConfigFile {
    // section name -> key -> raw value; top-level keys live under "".
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::string origin = "<none>";

    static ConfigFile parse_file(const std::filesystem::path& path);
    static ConfigFile parse_string(std::string_view text,
                                   const std::string& origin = "<string>");

    bool has_section(const std::string& section) const;
    bool has(const std::string& section, const std::string& key) const;
    std::vector<std::string> keys(const std::string& section) const;

    // Typed getters throw parse_error on a missing key or unparseable value.
    const std::string& get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    long long get_int(const std::string& section, const std::string& key) const;
    long long get_int_or(const std::string& section, const std::string& key,
                         long long fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const;
    std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                             std::uint64_t fallback) const;
    // Comma-separated values, whitespace-trimmed.
    std::vector<std::string> get_list(const std::string& section,
                                      const std::string& key) const;
    std::vector<long long> get_int_list(const std::string& section,
                                        const std::string& key) const;

    // Rejects keys outside the allowed set for a section (typo guard).
    void check_known_keys(const std::string& section,
                          std::span<const std::string_view> allowed) const;
};

} // namespace qgd
