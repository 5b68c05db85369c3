#pragma once

#include <map>
#include <string>
#include <vector>

namespace fibermc {

// Value model for the TOML subset the run configs use: one level of
// [section] headers, bare dotted keys, strings, numbers, booleans and
// (possibly nested, possibly multi-line) arrays.
struct TomlValue {
  enum class Kind { String, Number, Boolean, Array };
  Kind kind = Kind::Number;
  std::string str;
  double num = 0.0;
  bool boolean = false;
  std::vector<TomlValue> array;
};

// Flat map keyed by "section.key" ("key" at top level).
using TomlTable = std::map<std::string, TomlValue>;

// Parses text into out. On failure returns false and err carries a
// line-numbered message.
bool toml_parse(const std::string& text, TomlTable& out, std::string& err);

}  // namespace fibermc
