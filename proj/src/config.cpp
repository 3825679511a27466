#include "res/config.hpp"

#include <algorithm>
#include <sstream>

#include "res/textio.hpp"

namespace res {

Config Config::parse(const std::string& text) {
    Config cfg;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(raw);
        // comments run to end of line; inline ones need whitespace before the marker
        for (size_t i = 0; i < line.size(); ++i) {
            if ((line[i] == '#' || line[i] == ';') &&
                (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
                line = trim(line.substr(0, i));
                break;
            }
        }
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail("config line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (cfg.values_.count(section) == 0) cfg.values_[section] = {};
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail("config line " + std::to_string(lineno) + ": empty key");
        cfg.set(section, key, value);
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    return parse(read_file(path));
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto it = values_.find(section);
    return it != values_.end() && it->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key) const {
    auto it = values_.find(section);
    if (it == values_.end() || it->second.count(key) == 0)
        fail("config: missing key '" + key + "' in section [" + section + "]");
    return it->second.at(key);
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

long Config::get_int(const std::string& section, const std::string& key) const {
    const std::string v = get(section, key);
    try {
        size_t pos = 0;
        long out = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        fail("config: key '" + key + "' is not an integer: " + v);
    }
}

long Config::get_int_or(const std::string& section, const std::string& key, long fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

real Config::get_real(const std::string& section, const std::string& key) const {
    const std::string v = get(section, key);
    try {
        size_t pos = 0;
        real out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        fail("config: key '" + key + "' is not a number: " + v);
    }
}

real Config::get_real_or(const std::string& section, const std::string& key, real fallback) const {
    return has(section, key) ? get_real(section, key) : fallback;
}

std::vector<std::string> Config::get_list(const std::string& section,
                                          const std::string& key) const {
    std::string v = get(section, key);
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= v.size()) {
        size_t comma = v.find(',', start);
        std::string item =
            trim(comma == std::string::npos ? v.substr(start) : v.substr(start, comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    if (values_[section].count(key) == 0) order_.emplace_back(section, key);
    values_[section][key] = value;
}

std::vector<std::string> Config::sections() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : values_)
        if (!name.empty()) out.push_back(name);
    return out;
}

std::string Config::dump() const {
    std::ostringstream out;
    std::string current = "";
    bool first = true;
    for (const auto& [section, key] : order_) {
        if (section != current || (first && !section.empty())) {
            if (!first) out << "\n";
            if (!section.empty()) out << "[" << section << "]\n";
            current = section;
        }
        out << key << " = " << values_.at(section).at(key) << "\n";
        first = false;
    }
    return out.str();
}

} // namespace res
