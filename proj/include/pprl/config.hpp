#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pprl {

// Flat key=value configuration with [section] headers. Keys inside a section
// are addressed as "section.key"; later assignments win. '#' starts a
// comment, blank lines are ignored, whitespace around keys and values is
// trimmed. Values themselves carry no quoting or escapes.
struct ConfigFile {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }

  std::string get(const std::string& key, const std::string& fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated list, entries trimmed, empties dropped.
  std::vector<std::string> get_list(const std::string& key,
                                    const std::vector<std::string>& fallback) const;
};

// Throws std::runtime_error naming the line on any malformed input.
ConfigFile parse_config(const std::string& text);
ConfigFile read_config_file(const std::string& path);

}  // namespace pprl
