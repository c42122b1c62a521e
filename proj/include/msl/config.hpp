#pragma once
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace msl {

// Raised for parse errors, schema violations, and unknown keys. Messages
// carry "origin:line:" prefixes where a location is known.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigValue {
  enum class Kind { Bool, Int, Float, String, Array };
  Kind kind = Kind::Int;
  bool b = false;
  std::int64_t i = 0;
  double f = 0.0;
  std::string s;
  std::vector<ConfigValue> items;
  int line = 0;

  // numeric accessor: ints promote to double
  double as_number() const;
};

bool value_equal(const ConfigValue& a, const ConfigValue& b);

// Line-oriented key/value config: [section] headers, `key = value` entries,
// `#` comments. Values: booleans, 64-bit integers, floats, quoted strings,
// and single-line arrays. Duplicate sections or keys are errors.
class Config {
 public:
  struct Entry {
    std::string key;
    ConfigValue value;
  };
  struct Section {
    std::string name;
    int line = 0;
    std::vector<Entry> entries;
  };

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text,
                             const std::string& origin = "<string>");

  const Section* find_section(const std::string& name) const;
  const ConfigValue* find(const std::string& section, const std::string& key) const;

  // throws if a section outside `allowed` is present
  void check_only_sections(const std::vector<std::string>& allowed) const;

  const std::vector<Section>& sections() const { return sections_; }
  const std::string& raw_text() const { return raw_; }
  const std::string& origin() const { return origin_; }

 private:
  std::vector<Section> sections_;
  std::string raw_;
  std::string origin_;
};

// Typed view of one section that records which keys were read; finish()
// rejects anything left over, so misspelled keys fail loudly.
class SectionReader {
 public:
  SectionReader(const Config& cfg, const std::string& name, bool required);

  bool present() const { return section_ != nullptr; }

  bool get_bool(const std::string& key, bool def);
  std::int64_t get_int(const std::string& key, std::int64_t def);
  std::int64_t require_int(const std::string& key);
  double get_double(const std::string& key, double def);
  double require_double(const std::string& key);
  std::string get_string(const std::string& key, const std::string& def);
  std::string require_string(const std::string& key);
  std::vector<double> require_number_array(const std::string& key);
  std::vector<std::int64_t> require_int_array(const std::string& key);
  std::vector<std::string> get_string_array(const std::string& key,
                                            const std::vector<std::string>& def);

  void finish();

 private:
  const ConfigValue* lookup(const std::string& key);
  [[noreturn]] void fail(const std::string& key, const std::string& what,
                         int line) const;

  const Config* cfg_;
  const Config::Section* section_;
  std::string name_;
  std::set<std::string> consumed_;
};

// FNV-1a over the raw config text, printed as 16 hex digits; embedded in
// every report so outputs are traceable to their inputs.
std::uint64_t fnv1a64(const std::string& bytes);
std::string config_hash(const Config& cfg);

}  // namespace msl
