#pragma once

#include <string>
#include <vector>

namespace res {

std::vector<std::string> split_whitespace(const std::string& s);
std::string join(const std::vector<std::string>& parts, const std::string& sep);
std::string lowercase(const std::string& s);
std::string trim(const std::string& s);

// lowercase, collapse internal whitespace to single spaces, trim ends
std::string normalize_text(const std::string& s);

std::string read_file(const std::string& path);
std::vector<std::string> read_lines(const std::string& path);

// write to <path>.tmp, then rename over <path>
void write_file_atomic(const std::string& path, const std::string& content);

bool file_exists(const std::string& path);

} // namespace res
