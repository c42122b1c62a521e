#include "msl/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace msl {

namespace {

[[noreturn]] void parse_fail(const std::string& origin, int line,
                             const std::string& what) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << what;
  throw ConfigError(os.str());
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace((unsigned char)s[b])) ++b;
  while (e > b && std::isspace((unsigned char)s[e - 1])) --e;
  return s.substr(b, e - b);
}

// strips an unquoted # comment
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum((unsigned char)c) && c != '_' && c != '-' && c != '.')
      return false;
  return true;
}

// parses one scalar or array token; `text` must be fully consumed
ConfigValue parse_value(const std::string& text, const std::string& origin,
                        int line);

std::string parse_quoted(const std::string& text, const std::string& origin,
                         int line) {
  std::string out;
  for (std::size_t i = 1; i + 1 <= text.size(); ++i) {
    if (i == text.size() - 1) {
      if (text[i] != '"') parse_fail(origin, line, "unterminated string");
      return out;
    }
    char c = text[i];
    if (c == '\\') {
      if (i + 2 >= text.size()) parse_fail(origin, line, "dangling escape");
      char e = text[++i];
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: parse_fail(origin, line, "unsupported escape sequence");
      }
    } else if (c == '"') {
      parse_fail(origin, line, "text after closing quote");
    } else {
      out += c;
    }
  }
  parse_fail(origin, line, "unterminated string");
}

ConfigValue parse_array(const std::string& text, const std::string& origin,
                        int line) {
  ConfigValue v;
  v.kind = ConfigValue::Kind::Array;
  v.line = line;
  const std::string inner = trim(text.substr(1, text.size() - 2));
  if (inner.empty()) return v;
  // split on commas outside strings and nested brackets
  int depth = 0;
  bool in_str = false;
  std::string cur;
  auto flush = [&]() {
    const std::string t = trim(cur);
    if (t.empty()) parse_fail(origin, line, "empty array element");
    v.items.push_back(parse_value(t, origin, line));
    cur.clear();
  };
  for (std::size_t i = 0; i < inner.size(); ++i) {
    char c = inner[i];
    if (c == '"' && (i == 0 || inner[i - 1] != '\\')) in_str = !in_str;
    if (!in_str) {
      if (c == '[') ++depth;
      if (c == ']') --depth;
      if (c == ',' && depth == 0) {
        flush();
        continue;
      }
    }
    cur += c;
  }
  flush();
  return v;
}

ConfigValue parse_value(const std::string& text, const std::string& origin,
                        int line) {
  ConfigValue v;
  v.line = line;
  if (text.empty()) parse_fail(origin, line, "missing value");
  if (text.front() == '"') {
    v.kind = ConfigValue::Kind::String;
    v.s = parse_quoted(text, origin, line);
    return v;
  }
  if (text.front() == '[') {
    if (text.back() != ']') parse_fail(origin, line, "unterminated array");
    return parse_array(text, origin, line);
  }
  if (text == "true" || text == "false") {
    v.kind = ConfigValue::Kind::Bool;
    v.b = (text == "true");
    return v;
  }
  // number: integer first, then float
  errno = 0;
  char* end = nullptr;
  const long long asint = std::strtoll(text.c_str(), &end, 10);
  if (end == text.c_str() + text.size() && errno != ERANGE) {
    v.kind = ConfigValue::Kind::Int;
    v.i = asint;
    return v;
  }
  errno = 0;
  end = nullptr;
  const double asdouble = std::strtod(text.c_str(), &end);
  if (end == text.c_str() + text.size() && errno != ERANGE) {
    v.kind = ConfigValue::Kind::Float;
    v.f = asdouble;
    return v;
  }
  parse_fail(origin, line, "cannot parse value '" + text + "'");
}

const char* kind_name(ConfigValue::Kind k) {
  switch (k) {
    case ConfigValue::Kind::Bool: return "bool";
    case ConfigValue::Kind::Int: return "integer";
    case ConfigValue::Kind::Float: return "float";
    case ConfigValue::Kind::String: return "string";
    case ConfigValue::Kind::Array: return "array";
  }
  return "?";
}

}  // namespace

double ConfigValue::as_number() const {
  if (kind == Kind::Int) return double(i);
  if (kind == Kind::Float) return f;
  throw ConfigError("value is not numeric");
}

bool value_equal(const ConfigValue& a, const ConfigValue& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ConfigValue::Kind::Bool: return a.b == b.b;
    case ConfigValue::Kind::Int: return a.i == b.i;
    case ConfigValue::Kind::Float: return a.f == b.f;
    case ConfigValue::Kind::String: return a.s == b.s;
    case ConfigValue::Kind::Array: {
      if (a.items.size() != b.items.size()) return false;
      for (std::size_t i = 0; i < a.items.size(); ++i)
        if (!value_equal(a.items[i], b.items[i])) return false;
      return true;
    }
  }
  return false;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.raw_ = text;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  Section* current = nullptr;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_fail(origin, lineno, "unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (!valid_name(name)) parse_fail(origin, lineno, "invalid section name");
      if (cfg.find_section(name))
        parse_fail(origin, lineno, "duplicate section [" + name + "]");
      cfg.sections_.push_back(Section{name, lineno, {}});
      current = &cfg.sections_.back();
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      parse_fail(origin, lineno, "expected 'key = value' or '[section]'");
    const std::string key = trim(line.substr(0, eq));
    if (!valid_name(key)) parse_fail(origin, lineno, "invalid key name");
    if (!current) {
      cfg.sections_.push_back(Section{"", 0, {}});
      current = &cfg.sections_.back();
    }
    for (const Entry& e : current->entries)
      if (e.key == key)
        parse_fail(origin, lineno,
                   "duplicate key '" + key + "' in section [" + current->name + "]");
    current->entries.push_back(
        Entry{key, parse_value(trim(line.substr(eq + 1)), origin, lineno)});
  }
  return cfg;
}

const Config::Section* Config::find_section(const std::string& name) const {
  for (const Section& s : sections_)
    if (s.name == name) return &s;
  return nullptr;
}

const ConfigValue* Config::find(const std::string& section,
                                const std::string& key) const {
  const Section* s = find_section(section);
  if (!s) return nullptr;
  for (const Entry& e : s->entries)
    if (e.key == key) return &e.value;
  return nullptr;
}

void Config::check_only_sections(const std::vector<std::string>& allowed) const {
  for (const Section& s : sections_) {
    bool ok = false;
    for (const std::string& a : allowed)
      if (s.name == a) ok = true;
    if (!ok)
      parse_fail(origin_, s.line, "unknown section [" + s.name + "]");
  }
}

SectionReader::SectionReader(const Config& cfg, const std::string& name,
                             bool required)
    : cfg_(&cfg), section_(cfg.find_section(name)), name_(name) {
  if (required && !section_)
    throw ConfigError(cfg.origin() + ": missing required section [" + name + "]");
}

const ConfigValue* SectionReader::lookup(const std::string& key) {
  if (!section_) return nullptr;
  consumed_.insert(key);
  for (const Config::Entry& e : section_->entries)
    if (e.key == key) return &e.value;
  return nullptr;
}

void SectionReader::fail(const std::string& key, const std::string& what,
                         int line) const {
  std::ostringstream os;
  os << cfg_->origin() << ":" << line << ": [" << name_ << "] " << key << ": "
     << what;
  throw ConfigError(os.str());
}

bool SectionReader::get_bool(const std::string& key, bool def) {
  const ConfigValue* v = lookup(key);
  if (!v) return def;
  if (v->kind != ConfigValue::Kind::Bool) fail(key, "expected a bool", v->line);
  return v->b;
}

std::int64_t SectionReader::get_int(const std::string& key, std::int64_t def) {
  const ConfigValue* v = lookup(key);
  if (!v) return def;
  if (v->kind != ConfigValue::Kind::Int) fail(key, "expected an integer", v->line);
  return v->i;
}

std::int64_t SectionReader::require_int(const std::string& key) {
  const ConfigValue* v = lookup(key);
  if (!v) fail(key, "missing required integer key", section_ ? section_->line : 0);
  if (v->kind != ConfigValue::Kind::Int) fail(key, "expected an integer", v->line);
  return v->i;
}

double SectionReader::get_double(const std::string& key, double def) {
  const ConfigValue* v = lookup(key);
  if (!v) return def;
  if (v->kind != ConfigValue::Kind::Int && v->kind != ConfigValue::Kind::Float)
    fail(key, "expected a number", v->line);
  return v->as_number();
}

double SectionReader::require_double(const std::string& key) {
  const ConfigValue* v = lookup(key);
  if (!v) fail(key, "missing required numeric key", section_ ? section_->line : 0);
  if (v->kind != ConfigValue::Kind::Int && v->kind != ConfigValue::Kind::Float)
    fail(key, "expected a number", v->line);
  return v->as_number();
}

std::string SectionReader::get_string(const std::string& key,
                                      const std::string& def) {
  const ConfigValue* v = lookup(key);
  if (!v) return def;
  if (v->kind != ConfigValue::Kind::String) fail(key, "expected a string", v->line);
  return v->s;
}

std::string SectionReader::require_string(const std::string& key) {
  const ConfigValue* v = lookup(key);
  if (!v) fail(key, "missing required string key", section_ ? section_->line : 0);
  if (v->kind != ConfigValue::Kind::String) fail(key, "expected a string", v->line);
  return v->s;
}

std::vector<double> SectionReader::require_number_array(const std::string& key) {
  const ConfigValue* v = lookup(key);
  if (!v) fail(key, "missing required array key", section_ ? section_->line : 0);
  if (v->kind != ConfigValue::Kind::Array) fail(key, "expected an array", v->line);
  std::vector<double> out;
  out.reserve(v->items.size());
  for (const ConfigValue& e : v->items) {
    if (e.kind != ConfigValue::Kind::Int && e.kind != ConfigValue::Kind::Float)
      fail(key, std::string("array element is a ") + kind_name(e.kind) +
                    ", expected a number",
           e.line);
    out.push_back(e.as_number());
  }
  return out;
}

std::vector<std::int64_t> SectionReader::require_int_array(const std::string& key) {
  const ConfigValue* v = lookup(key);
  if (!v) fail(key, "missing required array key", section_ ? section_->line : 0);
  if (v->kind != ConfigValue::Kind::Array) fail(key, "expected an array", v->line);
  std::vector<std::int64_t> out;
  out.reserve(v->items.size());
  for (const ConfigValue& e : v->items) {
    if (e.kind != ConfigValue::Kind::Int)
      fail(key, "array element must be an integer", e.line);
    out.push_back(e.i);
  }
  return out;
}

std::vector<std::string> SectionReader::get_string_array(
    const std::string& key, const std::vector<std::string>& def) {
  const ConfigValue* v = lookup(key);
  if (!v) return def;
  if (v->kind != ConfigValue::Kind::Array) fail(key, "expected an array", v->line);
  std::vector<std::string> out;
  out.reserve(v->items.size());
  for (const ConfigValue& e : v->items) {
    if (e.kind != ConfigValue::Kind::String)
      fail(key, "array element must be a string", e.line);
    out.push_back(e.s);
  }
  return out;
}

void SectionReader::finish() {
  if (!section_) return;
  for (const Config::Entry& e : section_->entries) {
    if (!consumed_.count(e.key))
      fail(e.key, "unknown key", e.value.line);
  }
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const Config& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                (unsigned long long)fnv1a64(cfg.raw_text()));
  return buf;
}

}  // namespace msl
