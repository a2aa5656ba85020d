#include "spinreg/ini.hpp"

#include "spinreg/util.hpp"

#include <sstream>

namespace spinreg {

const std::string* IniSection::get(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return &v;
    return nullptr;
}

std::string IniSection::require(const std::string& key) const {
    const std::string* v = get(key);
    if (!v) throw ConfigError("section [" + name + "] missing key '" + key + "'");
    return *v;
}

double IniSection::require_double(const std::string& key) const {
    return parse_double(require(key));
}

double IniSection::get_double(const std::string& key, double fallback) const {
    const std::string* v = get(key);
    return v ? parse_double(*v) : fallback;
}

const IniSection* IniDoc::find(const std::string& name) const {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

std::vector<const IniSection*> IniDoc::with_prefix(const std::string& prefix) const {
    std::vector<const IniSection*> out;
    for (const auto& s : sections)
        if (s.name.rfind(prefix, 0) == 0) out.push_back(&s);
    return out;
}

IniDoc parse_ini(const std::string& text) {
    IniDoc doc;
    std::istringstream iss(text);
    std::string raw;
    int lineno = 0;
    IniSection* cur = nullptr;
    while (std::getline(iss, raw)) {
        ++lineno;
        std::string line = raw;
        // strip comments
        for (char marker : {'#', ';'}) {
            const auto pos = line.find(marker);
            if (pos != std::string::npos) line = line.substr(0, pos);
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
            doc.sections.push_back(IniSection{trim(line.substr(1, line.size() - 2)), {}});
            cur = &doc.sections.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        if (!cur) throw ConfigError("line " + std::to_string(lineno) + ": entry outside any [section]");
        cur->entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return doc;
}

} // namespace spinreg
