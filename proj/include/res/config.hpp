#pragma once

#include <map>
#include <string>
#include <vector>

#include "res/common.hpp"

namespace res {

// Plain hierarchical text config:
//
//   # comment
//   top_key = value
//   [section]
//   key = a, b, c   # trailing comment
//
// Keys at the top of the file live in the "" section. Values are strings;
// typed getters parse on access. List values split on commas. A '#' or ';'
// preceded by whitespace starts a comment.
class Config {
  public:
    Config() = default;

    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;

    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    long get_int(const std::string& section, const std::string& key) const;
    long get_int_or(const std::string& section, const std::string& key, long fallback) const;
    real get_real(const std::string& section, const std::string& key) const;
    real get_real_or(const std::string& section, const std::string& key, real fallback) const;
    std::vector<std::string> get_list(const std::string& section, const std::string& key) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

    std::vector<std::string> sections() const;
    std::string dump() const;

  private:
    // section -> key -> value; insertion order kept for dump()
    std::map<std::string, std::map<std::string, std::string>> values_;
    std::vector<std::pair<std::string, std::string>> order_;
};

} // namespace res
