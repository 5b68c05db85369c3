#include "core/toml_lite.hpp"

#include <cctype>
#include <cstdlib>

namespace fibermc {
namespace {

struct Cursor {
  const std::string& s;
  size_t i = 0;
  int line = 1;

  bool done() const { return i >= s.size(); }
  char peek() const { return s[i]; }
  char take() {
    char c = s[i++];
    if (c == '\n') line++;
    return c;
  }
  // Skips spaces, tabs and comments; newlines too when eat_newlines.
  void skip(bool eat_newlines) {
    while (!done()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        take();
      } else if (c == '#') {
        while (!done() && peek() != '\n') take();
      } else if (c == '\n' && eat_newlines) {
        take();
      } else {
        break;
      }
    }
  }
  std::string where() const { return "line " + std::to_string(line); }
};

bool is_bare(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         c == '.' || c == '/';
}

bool parse_value(Cursor& cur, TomlValue& v, std::string& err);

bool parse_string(Cursor& cur, TomlValue& v, std::string& err) {
  cur.take();  // opening quote
  std::string out;
  while (!cur.done()) {
    char c = cur.take();
    if (c == '"') {
      v.kind = TomlValue::Kind::String;
      v.str = out;
      return true;
    }
    if (c == '\\') {
      if (cur.done()) break;
      char e = cur.take();
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default:
          err = cur.where() + ": unsupported escape '\\" + e + "'";
          return false;
      }
      continue;
    }
    if (c == '\n') break;
    out += c;
  }
  err = cur.where() + ": unterminated string";
  return false;
}

bool parse_array(Cursor& cur, TomlValue& v, std::string& err) {
  cur.take();  // '['
  v.kind = TomlValue::Kind::Array;
  v.array.clear();
  for (;;) {
    cur.skip(true);
    if (cur.done()) {
      err = cur.where() + ": unterminated array";
      return false;
    }
    if (cur.peek() == ']') {
      cur.take();
      return true;
    }
    TomlValue elem;
    if (!parse_value(cur, elem, err)) return false;
    v.array.push_back(std::move(elem));
    cur.skip(true);
    if (cur.done()) {
      err = cur.where() + ": unterminated array";
      return false;
    }
    if (cur.peek() == ',') {
      cur.take();
    } else if (cur.peek() != ']') {
      err = cur.where() + ": expected ',' or ']' in array";
      return false;
    }
  }
}

bool parse_value(Cursor& cur, TomlValue& v, std::string& err) {
  cur.skip(false);
  if (cur.done()) {
    err = cur.where() + ": missing value";
    return false;
  }
  char c = cur.peek();
  if (c == '"') return parse_string(cur, v, err);
  if (c == '[') return parse_array(cur, v, err);

  std::string tok;
  while (!cur.done() && (is_bare(cur.peek()) || cur.peek() == '+')) {
    tok += cur.take();
  }
  if (tok == "true" || tok == "false") {
    v.kind = TomlValue::Kind::Boolean;
    v.boolean = tok == "true";
    return true;
  }
  if (tok.empty()) {
    err = cur.where() + ": malformed value";
    return false;
  }
  const char* begin = tok.c_str();
  char* end = nullptr;
  double num = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    err = cur.where() + ": malformed number '" + tok + "'";
    return false;
  }
  v.kind = TomlValue::Kind::Number;
  v.num = num;
  return true;
}

}  // namespace

bool toml_parse(const std::string& text, TomlTable& out, std::string& err) {
  Cursor cur{text};
  std::string section;
  for (;;) {
    cur.skip(true);
    if (cur.done()) return true;

    if (cur.peek() == '[') {
      cur.take();
      std::string name;
      while (!cur.done() && is_bare(cur.peek())) name += cur.take();
      cur.skip(false);
      if (cur.done() || cur.peek() != ']' || name.empty()) {
        err = cur.where() + ": malformed section header";
        return false;
      }
      cur.take();
      section = name;
      continue;
    }

    std::string key;
    while (!cur.done() && is_bare(cur.peek())) key += cur.take();
    if (key.empty()) {
      err = cur.where() + ": expected key";
      return false;
    }
    cur.skip(false);
    if (cur.done() || cur.peek() != '=') {
      err = cur.where() + ": expected '=' after key '" + key + "'";
      return false;
    }
    cur.take();
    TomlValue v;
    if (!parse_value(cur, v, err)) return false;
    cur.skip(false);
    if (!cur.done() && cur.peek() != '\n') {
      err = cur.where() + ": trailing characters after value for '" + key +
            "'";
      return false;
    }
    std::string full = section.empty() ? key : section + "." + key;
    if (out.count(full)) {
      err = cur.where() + ": duplicate key '" + full + "'";
      return false;
    }
    out[full] = std::move(v);
  }
}

}  // namespace fibermc
