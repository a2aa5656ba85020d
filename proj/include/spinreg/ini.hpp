// ini.hpp — minimal sectioned key=value reader/writer used by the config
// file formats. Lines: "[section]", "key = value", comments with '#' or ';'.

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace spinreg {

struct IniSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string* get(const std::string& key) const;
    std::string require(const std::string& key) const;
    double require_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
};

struct IniDoc {
    std::vector<IniSection> sections;

    const IniSection* find(const std::string& name) const;
    std::vector<const IniSection*> with_prefix(const std::string& prefix) const;
};

IniDoc parse_ini(const std::string& text);

} // namespace spinreg
